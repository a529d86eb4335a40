"""Counter-based deterministic randomness.

All randomness in the package flows through the SplitMix64 stream: the
value at counter i for a given seed is

    value(seed, i) = mix64(seed + (i + 1) * GOLDEN  mod 2**64)

where mix64 is the SplitMix64 finalizer (Steele/Lea/Flood 2014) and
GOLDEN = 0x9E3779B97F4A7C15.  This is a pure function of (seed, i), so
identical seeds reproduce identical experiments on any platform, and
streams can be evaluated out of order or vectorised with numpy.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def stream_value(seed: int, counter: int) -> int:
    """The counter-th 64-bit value of the stream for `seed`."""
    return mix64((seed + (counter + 1) * GOLDEN) & MASK64)


def stream_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorised stream values at counters start..start+count-1."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (np.uint64(seed & MASK64) + (idx + np.uint64(1)) * np.uint64(GOLDEN))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return z


def derive(seed: int, *parts: int) -> int:
    """Derive an independent child seed from a master seed and indices."""
    s = seed & MASK64
    for p in parts:
        s = mix64(s ^ mix64(p & MASK64))
    return s


class CounterRng:
    """Sequential convenience wrapper over the counter stream.

    Draws consume consecutive counters, so a CounterRng is replayable
    from (seed, starting counter) alone.
    """

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter

    def next_u64(self) -> int:
        v = stream_value(self.seed, self.counter)
        self.counter += 1
        return v

    def random(self) -> float:
        return self.next_u64() / 2**64

    def randrange(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        # Rejection-free modulo is fine here: n is tiny against 2**64.
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, seq: list) -> None:
        for i in range(len(seq) - 1, 0, -1):
            j = self.randrange(i + 1)
            seq[i], seq[j] = seq[j], seq[i]

    def sample(self, seq, k: int) -> list:
        pool = list(seq)
        if k > len(pool):
            raise ValueError("sample larger than population")
        self.shuffle(pool)
        return pool[:k]
