"""Bandwidth labellings, proper colourings, and zero-free block structure.

Exact bandwidth is branch-and-bound and capped at n <= 12; the heuristic
is a reverse Cuthill-McKee style BFS ordering.  Colour 0 is the
designated zero colour throughout, so the greedy colourer prefers
colours 1..k and falls back to 0 only when forced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import floor
from typing import Sequence

from .graph import Graph, bits_of

EXACT_BANDWIDTH_CAP = 12


class BandwidthSizeError(ValueError):
    """Raised when exact_bandwidth is asked for a graph beyond the cap."""


class ColouringNotFound(Exception):
    """No proper colouring within the colour budget was found.

    `proven` is True when exhaustive search established chi(h) > k+1.
    """

    def __init__(self, message: str, proven: bool):
        super().__init__(message)
        self.proven = proven


@dataclass(frozen=True)
class Labelling:
    """A bijection vertex -> position with its realised bandwidth."""

    position: tuple[int, ...]
    bandwidth: int

    @classmethod
    def from_order(cls, g: Graph, order: Sequence[int]) -> "Labelling":
        """Build from a vertex sequence (order[t] sits at position t)."""
        if sorted(order) != list(range(g.n)):
            raise ValueError("order is not a bijection on V")
        position = [0] * g.n
        for pos, v in enumerate(order):
            position[v] = pos
        bw = max((abs(position[u] - position[v]) for u, v in g.edges()), default=0)
        return cls(tuple(position), bw)

    @classmethod
    def identity(cls, g: Graph) -> "Labelling":
        return cls.from_order(g, range(g.n))

    def order(self) -> list[int]:
        """Inverse view: vertex at each position."""
        out = [0] * len(self.position)
        for v, pos in enumerate(self.position):
            out[pos] = v
        return out

    def recompute_bandwidth(self, g: Graph) -> int:
        return max((abs(self.position[u] - self.position[v]) for u, v in g.edges()), default=0)


@dataclass(frozen=True)
class Colouring:
    """Vertex colours in {0..k}; properness is checked by verify ops, not assumed."""

    colour: tuple[int, ...]
    k: int

    def is_proper(self, g: Graph) -> bool:
        return all(self.colour[u] != self.colour[v] for u, v in g.edges())

    def classes(self) -> dict[int, set[int]]:
        out: dict[int, set[int]] = {}
        for v, c in enumerate(self.colour):
            out.setdefault(c, set()).add(v)
        return out


@dataclass(frozen=True)
class BlockDecomposition:
    """Consecutive position blocks of size floor(4*k*beta*n), last one ragged."""

    n: int
    block_size: int
    zero_blocks: tuple[int, ...] = field(default=())

    @classmethod
    def build(cls, col: Colouring, lab: Labelling, beta: float, k: int) -> "BlockDecomposition":
        n = len(lab.position)
        bs = floor(4 * k * beta * n)
        if bs < 1:
            raise ValueError(f"block size 4*k*beta*n = {4 * k * beta * n:.3f} < 1")
        zero = set()
        for v, c in enumerate(col.colour):
            if c == 0:
                zero.add(lab.position[v] // bs)
        return cls(n, bs, tuple(sorted(zero)))

    @property
    def block_count(self) -> int:
        return (self.n + self.block_size - 1) // self.block_size

    def block_of(self, pos: int) -> int:
        return pos // self.block_size


def check_zero_free(col: Colouring, lab: Labelling, z: int, beta: float, k: int) -> bool:
    """True iff every window of z consecutive blocks has at most one zero block.

    The trailing ragged block counts as an ordinary block.
    """
    dec = BlockDecomposition.build(col, lab, beta, k)
    zero = dec.zero_blocks
    for i in range(1, len(zero)):
        if zero[i] - zero[i - 1] < z:
            return False
    return True


def neighbourhood_colour_count(h: Graph, col: Colouring, v: int) -> int:
    """Number of distinct colours appearing on N(v)."""
    return len({col.colour[u] for u in h.neighbours(v)})


def heuristic_labelling(g: Graph) -> Labelling:
    """Reverse Cuthill-McKee style ordering; components laid out consecutively."""
    n = g.n
    visited = [False] * n
    order: list[int] = []
    deg = [g.degree(v) for v in range(n)]
    for start in sorted(range(n), key=lambda v: (deg[v], v)):
        if visited[start]:
            continue
        comp: list[int] = []
        queue = [start]
        visited[start] = True
        while queue:
            u = queue.pop(0)
            comp.append(u)
            nxt = sorted((w for w in g.neighbours(u) if not visited[w]),
                         key=lambda w: (deg[w], w))
            for w in nxt:
                visited[w] = True
            queue.extend(nxt)
        order.extend(reversed(comp))
    return Labelling.from_order(g, order)


def exact_bandwidth(g: Graph) -> tuple[int, Labelling]:
    """True minimum bandwidth with a witness labelling (branch and bound)."""
    n = g.n
    if n > EXACT_BANDWIDTH_CAP:
        raise BandwidthSizeError(
            f"exact bandwidth is capped at n <= {EXACT_BANDWIDTH_CAP} "
            f"(got n={n}); use heuristic_labelling instead"
        )
    if n == 0:
        return 0, Labelling((), 0)

    heur = heuristic_labelling(g)
    best_bw = heur.bandwidth
    best_order = heur.order()
    placed_pos = [-1] * n

    def rec(t: int, order: list[int], cur_bw: int, frontier: int) -> None:
        nonlocal best_bw, best_order
        if cur_bw >= best_bw:
            return
        if t == n:
            best_bw, best_order = cur_bw, order.copy()
            return
        # Any placed vertex with an unplaced neighbour forces a stretch
        # of at least t - pos when the neighbour lands at position >= t.
        for q in range(frontier, t):
            w = order[q]
            if g.neighbour_bits(w) & ~placed_mask[0]:
                if t - q >= best_bw:
                    return
                break
        for v in range(n):
            if placed_pos[v] >= 0:
                continue
            stretch = cur_bw
            ok = True
            for u in bits_of(g.neighbour_bits(v) & placed_mask[0]):
                s = t - placed_pos[u]
                if s >= best_bw:
                    ok = False
                    break
                if s > stretch:
                    stretch = s
            if not ok:
                continue
            placed_pos[v] = t
            placed_mask[0] |= 1 << v
            order.append(v)
            rec(t + 1, order, stretch, frontier)
            order.pop()
            placed_mask[0] ^= 1 << v
            placed_pos[v] = -1

    placed_mask = [0]
    rec(0, [], 0, 0)
    return best_bw, Labelling.from_order(g, best_order)


def _greedy_colours(g: Graph, order: Sequence[int], k: int) -> list[int] | None:
    """Greedy in the given order, preferring colours 1..k and 0 last."""
    colour = [-1] * g.n
    prefer = list(range(1, k + 1)) + [0]
    for v in order:
        used = {colour[u] for u in g.neighbours(v) if colour[u] >= 0}
        for c in prefer:
            if c not in used:
                colour[v] = c
                break
        else:
            return None
    return colour


def _dsatur_order(g: Graph) -> list[int]:
    n = g.n
    colour = [-1] * n
    sat = [set() for _ in range(n)]
    order = []
    for _ in range(n):
        v = max((u for u in range(n) if colour[u] < 0),
                key=lambda u: (len(sat[u]), g.degree(u), -u))
        c = 0
        while c in sat[v]:
            c += 1
        colour[v] = c
        order.append(v)
        for w in g.neighbours(v):
            sat[w].add(c)
    return order


def _exact_k_colouring(g: Graph, colours: int) -> list[int] | None:
    """Backtracking decision for chi(g) <= colours, n <= 20."""
    order = _dsatur_order(g)
    colour = [-1] * g.n

    def rec(i: int, used: int) -> bool:
        if i == g.n:
            return True
        v = order[i]
        seen = {colour[u] for u in g.neighbours(v) if colour[u] >= 0}
        for c in range(min(used + 1, colours)):
            if c in seen:
                continue
            colour[v] = c
            if rec(i + 1, max(used, c + 1)):
                return True
            colour[v] = -1
        return False

    return colour if rec(0, 0) else None


EXACT_COLOURING_CAP = 20


def proper_colouring(h: Graph, k: int, lab: Labelling) -> Colouring:
    """A proper colouring with colours {0..k}, or ColouringNotFound.

    Greedy in labelling order first, DSATUR next, exact search for
    n <= 20 when both exceed the budget.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    order = lab.order()
    colour = _greedy_colours(h, order, k)
    if colour is None:
        colour = _greedy_colours(h, _dsatur_order(h), k)
    if colour is None:
        if h.n <= EXACT_COLOURING_CAP:
            raw = _exact_k_colouring(h, k + 1)
            if raw is None:
                raise ColouringNotFound(f"chi(h) > {k + 1} (exhaustive)", proven=True)
            # Relabel classes so the designated zero colour is the rarest.
            sizes = [(raw.count(c), c) for c in set(raw)]
            sizes.sort(reverse=True)
            rename = {c: i + 1 for i, (_, c) in enumerate(sizes[:k])}
            for _, c in sizes[k:]:
                rename[c] = 0
            colour = [rename[c] for c in raw]
        else:
            raise ColouringNotFound(
                f"no ({k + 1})-colouring found within budget (n={h.n} > exact cap)",
                proven=False,
            )
    out = Colouring(tuple(colour), k)
    assert out.is_proper(h), "colouring output must be proper"
    return out


__all__ = [
    "Labelling",
    "Colouring",
    "BlockDecomposition",
    "BandwidthSizeError",
    "ColouringNotFound",
    "EXACT_BANDWIDTH_CAP",
    "check_zero_free",
    "neighbourhood_colour_count",
    "heuristic_labelling",
    "exact_bandwidth",
    "proper_colouring",
]
