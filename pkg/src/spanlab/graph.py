"""Immutable simple graphs over dense integer ids with bitset adjacency.

Adjacency rows are arbitrary-precision Python ints used as bitsets, so
neighbourhood intersections and clique counting are word-parallel.  A
packed uint64 matrix view is cached for the numba search kernels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .rng import GOLDEN, MASK64, stream_block


def bits_of(mask: int) -> Iterator[int]:
    """Yield set bit indices of `mask` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


class Graph:
    """Simple undirected graph on vertices 0..n-1, immutable after construction."""

    __slots__ = ("n", "_adj", "_m", "_bit_matrix")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        adj = [0] * n
        m = 0
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range for n={n}")
            bit_u, bit_v = 1 << u, 1 << v
            if not adj[u] & bit_v:
                adj[u] |= bit_v
                adj[v] |= bit_u
                m += 1
        self.n = n
        self._adj = adj
        self._m = m
        self._bit_matrix = None

    @classmethod
    def from_bitsets(cls, adj: Sequence[int]) -> "Graph":
        g = object.__new__(cls)
        g.n = len(adj)
        g._adj = list(adj)
        deg_sum = 0
        for v, row in enumerate(adj):
            if row >> g.n:
                raise ValueError("adjacency bits beyond vertex range")
            if row & (1 << v):
                raise ValueError(f"self-loop at {v}")
            deg_sum += row.bit_count()
        if deg_sum % 2:
            raise ValueError("asymmetric adjacency")
        g._m = deg_sum // 2
        g._bit_matrix = None
        return g

    @property
    def edge_count(self) -> int:
        return self._m

    def degree(self, v: int) -> int:
        return self._adj[v].bit_count()

    def neighbour_bits(self, v: int) -> int:
        return self._adj[v]

    def neighbours(self, v: int) -> Iterator[int]:
        return bits_of(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u] >> v & 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in bits_of(self._adj[u] >> (u + 1) << (u + 1)):
                yield (u, v)

    def is_subgraph_of(self, other: "Graph") -> bool:
        if self.n != other.n:
            return False
        return all(self._adj[v] & ~other._adj[v] == 0 for v in range(self.n))

    def bit_matrix(self) -> np.ndarray:
        """Packed (n, ceil(n/64)) uint64 adjacency view, cached."""
        if self._bit_matrix is None:
            words = (self.n + 63) // 64 or 1
            mat = np.zeros((self.n, words), dtype=np.uint64)
            for v in range(self.n):
                row = self._adj[v]
                mat[v] = np.frombuffer(
                    row.to_bytes(words * 8, "little"), dtype=np.uint64
                )
            self._bit_matrix = mat
        return self._bit_matrix

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self._m})"


@dataclass(frozen=True)
class GnpParams:
    """Parameters of a seeded binomial random graph."""

    n: int
    p: float
    seed: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must lie in [0, 1]")


def generate_gnp(params: GnpParams) -> Graph:
    """Sample G(n, p): each pair kept iff its counter-stream value < p * 2**64."""
    n, p = params.n, params.p
    if n <= 1 or p == 0.0:
        return Graph(n)
    threshold = int(p * 2**64)
    adj = [0] * n
    base = 0
    for u in range(n - 1):
        cnt = n - 1 - u
        if p >= 1.0:
            keep = np.arange(cnt)
        else:
            vals = stream_block(params.seed, base, cnt)
            keep = np.nonzero(vals < np.uint64(threshold))[0]
        base += cnt
        if keep.size:
            row_bits = 0
            for off in keep.tolist():
                row_bits |= 1 << (u + 1 + off)
            adj[u] |= row_bits
            bit_u = 1 << u
            for off in keep.tolist():
                adj[u + 1 + off] |= bit_u
    return Graph.from_bitsets(adj)


def min_degree(g: Graph) -> int:
    if g.n == 0:
        return 0
    return min(g.degree(v) for v in range(g.n))


def _count_cliques_in_mask(adj: Sequence[int], mask: int, s: int) -> int:
    """Number of s-cliques inside the vertex set `mask` (ascending-id search)."""
    if s == 0:
        return 1
    if s == 1:
        return mask.bit_count()
    total = 0
    rest = mask
    while rest:
        low = rest & -rest
        u = low.bit_length() - 1
        rest ^= low
        total += _count_cliques_in_mask(adj, rest & adj[u], s - 1)
    return total


def count_cliques_in_neighbourhood(g: Graph, v: int, s: int) -> int:
    """Exact number of s-cliques inside the induced subgraph on N(v).

    Backtracking is capped at s <= 8; use estimate_cliques_in_neighbourhood
    beyond that.
    """
    if s < 1:
        raise ValueError("s must be at least 1")
    if s > 8:
        raise ValueError("exact counter capped at s <= 8; use the sampling estimator")
    nb = g.neighbour_bits(v)
    if s == 1:
        return nb.bit_count()
    return _count_cliques_in_mask(g._adj, nb, s)


def estimate_cliques_in_neighbourhood(
    g: Graph, v: int, s: int, samples: int = 10_000, seed: int = 0
) -> tuple[float, float]:
    """(estimate, stderr) for the number of s-cliques in N(v), by subset sampling."""
    from math import comb, sqrt

    from .rng import CounterRng

    if s < 1:
        raise ValueError("s must be at least 1")
    nbhd = list(bits_of(g.neighbour_bits(v)))
    d = len(nbhd)
    if d < s:
        return 0.0, 0.0
    total = comb(d, s)
    rng = CounterRng(seed)
    hits = 0
    for _ in range(samples):
        chosen = rng.sample(nbhd, s)
        if all(g.has_edge(a, b) for i, a in enumerate(chosen) for b in chosen[i + 1:]):
            hits += 1
    phat = hits / samples
    return total * phat, total * sqrt(phat * (1 - phat) / samples)


def common_neighbourhood(g: Graph, vertices: Iterable[int]) -> set[int]:
    """Intersection of the neighbourhoods of `vertices`; all of V for the empty set."""
    mask = (1 << g.n) - 1
    for w in vertices:
        mask &= g.neighbour_bits(w)
    return set(bits_of(mask))


def common_neighbour_bits(g: Graph, vertices: Iterable[int]) -> int:
    mask = (1 << g.n) - 1
    for w in vertices:
        mask &= g.neighbour_bits(w)
    return mask


def write_edge_list(g: Graph, path: str) -> None:
    """Write the plain edge-list format: first line "n m", then "u v" lines."""
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.edge_count}\n")
        for u, v in g.edges():
            fh.write(f"{u} {v}\n")


def read_edge_list(path: str) -> Graph:
    """Read the plain "n m"/"u v" format or DIMACS .col ("p edge n m" / "e u v")."""
    edges: list[tuple[int, int]] = []
    n = None
    with open(path) as fh:
        for line in fh:
            tok = line.split()
            if not tok or tok[0] == "c":
                continue
            if tok[0] == "p":
                n = int(tok[2])
            elif tok[0] == "e":
                edges.append((int(tok[1]) - 1, int(tok[2]) - 1))
            elif n is None:
                n = int(tok[0])
            else:
                edges.append((int(tok[0]), int(tok[1])))
    if n is None:
        raise ValueError(f"no header line in {path}")
    return Graph(n, edges)


__all__ = [
    "Graph",
    "GnpParams",
    "bits_of",
    "mask_of",
    "generate_gnp",
    "min_degree",
    "count_cliques_in_neighbourhood",
    "estimate_cliques_in_neighbourhood",
    "common_neighbourhood",
    "common_neighbour_bits",
    "write_edge_list",
    "read_edge_list",
]
