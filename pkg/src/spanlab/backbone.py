"""Backbone graphs, k-equitable integer partitions, and clique walks.

Vertices of B^k_r and K^k_r are pairs (i, j) over [r] x [k], flattened
to i * k + j; (i, j) ~ (i', j') in B^k_r iff |i - i'| <= 1 and j != j',
and K^k_r keeps only the same-column cliques.

The clique walk morphs a labelled k-clique of a reduced graph into
another in exactly k(k+1)/2 steps such that consecutive cliques satisfy
the cross-adjacency demand (every cluster adjacent to each
differently-labelled cluster of the predecessor).  Fresh clusters are
common neighbours of at most k prescribed vertices -- guaranteed
nonempty under the minimum-degree precondition -- except for one step
that asks for k+1 and backtracks if unlucky.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import floor

from .graph import Graph, bits_of, common_neighbour_bits, mask_of


class NoCommonNeighbour(Exception):
    """A required common neighbour was absent during the walk construction."""

    def __init__(self, step: int, blocking: tuple[int, ...]):
        super().__init__(f"no common neighbour for {blocking} at walk step {step}")
        self.step = step
        self.blocking = blocking


@dataclass(frozen=True)
class LabelledClique:
    """A k-clique of a reduced graph; members[j] carries label j+1."""

    members: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.members)) != len(self.members):
            raise ValueError("clique members must be distinct")

    @property
    def k(self) -> int:
        return len(self.members)

    def validate(self, r_graph: Graph) -> None:
        for a in range(self.k):
            for b in range(a + 1, self.k):
                if not r_graph.has_edge(self.members[a], self.members[b]):
                    raise ValueError(
                        f"members {self.members[a]},{self.members[b]} not adjacent"
                    )


@dataclass(frozen=True)
class IntegerPartition:
    """Non-negative integer matrix over [r] x [k]."""

    values: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if any(x < 0 for row in self.values for x in row):
            raise ValueError("entries must be non-negative")

    @property
    def r(self) -> int:
        return len(self.values)

    @property
    def k(self) -> int:
        return len(self.values[0]) if self.values else 0

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.values)

    def is_k_equitable(self) -> bool:
        return all(max(row) - min(row) <= 1 for row in self.values if row)


def backbone_vertex(i: int, j: int, k: int) -> int:
    return i * k + j


def backbone_coords(v: int, k: int) -> tuple[int, int]:
    return divmod(v, k)


def backbone_graph(r: int, k: int) -> Graph:
    """B^k_r on [r] x [k]: edge iff |i - i'| <= 1 and j != j'."""
    if r < 1 or k < 1:
        raise ValueError("r and k must be positive")
    edges = []
    for i in range(r):
        for j in range(k):
            u = backbone_vertex(i, j, k)
            for j2 in range(j + 1, k):
                edges.append((u, backbone_vertex(i, j2, k)))
            if i + 1 < r:
                for j2 in range(k):
                    if j2 != j:
                        edges.append((u, backbone_vertex(i + 1, j2, k)))
    return Graph(r * k, edges)


def kkr_graph(r: int, k: int) -> Graph:
    """K^k_r: the disjoint union of r complete graphs on the columns."""
    if r < 1 or k < 1:
        raise ValueError("r and k must be positive")
    edges = []
    for i in range(r):
        for j in range(k):
            for j2 in range(j + 1, k):
                edges.append((backbone_vertex(i, j, k), backbone_vertex(i, j2, k)))
    return Graph(r * k, edges)


def augmented_backbone(r: int, k: int) -> Graph:
    """B^k_r plus same-colour edges between adjacent columns.

    The stand-in reduced graph of a dense host: every column then has a
    helper vertex in a neighbouring column adjacent to all its clusters.
    """
    b = backbone_graph(r, k)
    adj = [b.neighbour_bits(v) for v in range(b.n)]
    for i in range(r - 1):
        for j in range(k):
            u = backbone_vertex(i, j, k)
            w = backbone_vertex(i + 1, j, k)
            adj[u] |= 1 << w
            adj[w] |= 1 << u
    return Graph.from_bitsets(adj)


def k_equitable_targets(cluster_sizes: list[list[int]], v0_size: int) -> IntegerPartition:
    """Integer targets |V_{i,j}| + |V_0|/(kr), rounded to a k-equitable partition.

    Row totals are fixed by largest-remainder apportionment of the real
    row sums, then split as evenly as the row's own sizes allow; with
    k-equitable input each target lands within 1 of its real value.
    """
    r = len(cluster_sizes)
    k = len(cluster_sizes[0]) if r else 0
    if any(len(row) != k for row in cluster_sizes):
        raise ValueError("ragged size matrix")
    if any(x < 0 for row in cluster_sizes for x in row) or v0_size < 0:
        raise ValueError("sizes must be non-negative")
    total = sum(sum(row) for row in cluster_sizes) + v0_size
    share = v0_size / (k * r) if r else 0.0
    raw_rows = [sum(row) + k * share for row in cluster_sizes]
    floors = [floor(x) for x in raw_rows]
    rem = total - sum(floors)
    order = sorted(range(r), key=lambda i: raw_rows[i] - floors[i], reverse=True)
    row_totals = list(floors)
    for i in order[:rem]:
        row_totals[i] += 1
    values = []
    for i in range(r):
        base, extra = divmod(row_totals[i], k)
        # Put the +1s on the columns with the largest real targets.
        cols = sorted(range(k), key=lambda j: (-cluster_sizes[i][j], j))
        row = [base] * k
        for j in cols[:extra]:
            row[j] += 1
        values.append(tuple(row))
    part = IntegerPartition(tuple(values))
    assert part.total == total
    assert part.is_k_equitable()
    return part


def _walk_property_holds(r_graph: Graph, prev: LabelledClique, cur: LabelledClique) -> bool:
    k = prev.k
    for j, c in enumerate(cur.members):
        for j2, c_prev in enumerate(prev.members):
            if j != j2 and c != c_prev and not r_graph.has_edge(c, c_prev):
                return False
    return True


def verify_clique_walk(
    r_graph: Graph,
    walk: list[LabelledClique],
    start: LabelledClique,
    end: LabelledClique,
) -> bool:
    """Direct evaluation of the three walk properties."""
    if not walk:
        return False
    k = walk[0].k
    if len(walk) != k * (k + 1) // 2:
        return False
    if walk[0] != start or walk[-1] != end:
        return False
    try:
        for z in walk:
            z.validate(r_graph)
    except ValueError:
        return False
    return all(_walk_property_holds(r_graph, walk[t - 1], walk[t]) for t in range(1, len(walk)))


def check_common_neighbour_precondition(r_graph: Graph, k: int) -> bool:
    """Every k-subset has a common neighbour; direct for v(R) <= 40."""
    from itertools import combinations

    n = r_graph.n
    if n > 40:
        return min(r_graph.degree(v) for v in range(n)) > (k - 1) / k * n
    return all(
        common_neighbour_bits(r_graph, sub) != 0
        for sub in combinations(range(n), k)
    )


def _cn_candidates(r_graph: Graph, need: list[int], exclude: set[int]) -> list[int]:
    mask = common_neighbour_bits(r_graph, need) & ~mask_of(exclude)
    return list(bits_of(mask))


def clique_walk(
    r_graph: Graph,
    start: LabelledClique,
    end: LabelledClique,
    k: int,
) -> list[LabelledClique]:
    """A labelled-clique walk of length exactly k(k+1)/2 from start to end.

    Lowest-id common neighbours are chosen first; choice points are
    backtracked when a later common-neighbour query comes up empty, and
    NoCommonNeighbour reports the deepest blocking set on failure.
    """
    if start.k != k or end.k != k:
        raise ValueError("start/end must be k-cliques")
    start.validate(r_graph)
    end.validate(r_graph)
    length = k * (k + 1) // 2

    if start == end:
        return [start] * length
    if k == 1:
        raise NoCommonNeighbour(1, tuple(start.members))

    ends = list(end.members)
    deepest: list[tuple[int, tuple[int, ...]]] = [(0, ())]

    def fresh(cur: list[int], label_idx: int, extra: list[int], step: int) -> list[int]:
        need = [c for t, c in enumerate(cur) if t != label_idx] + extra
        exclude = set(ends) | {c for t, c in enumerate(cur) if t != label_idx}
        cands = _cn_candidates(r_graph, need, exclude)
        if not cands and step > deepest[0][0]:
            deepest[0] = (step, tuple(sorted(set(need))))
        return cands

    if k == 2:
        s1, s2 = start.members
        e1, e2 = end.members
        # Double replacement: w1 ~ {s2, e2}, w2 ~ {s1, e1, w1}.
        w1_cands = _cn_candidates(r_graph, [s2, e2], {s1, s2, e1, e2})
        for w1 in w1_cands:
            w2_cands = _cn_candidates(r_graph, [s1, e1, w1], {w1, s1, s2, e1, e2})
            if w2_cands:
                mid = LabelledClique((w1, w2_cands[0]))
                return [start, mid, end]
        # Single replacement fallbacks when an end vertex already fits.
        if r_graph.has_edge(e2, s1):
            for w in _cn_candidates(r_graph, [s1, e1], {s1, s2, e2}):
                return [start, LabelledClique((s1, w)), end]
        if r_graph.has_edge(e1, s2):
            for w in _cn_candidates(r_graph, [s2, e2], {s1, s2, e1}):
                return [start, LabelledClique((w, s2)), end]
        raise NoCommonNeighbour(1, (s1, s2, e1, e2))

    # k >= 3: rounds j = 0..k-3 refresh labels j+1..k-1 (with a spare
    # adjacency towards end[j]) and then insert end[j]; the last fresh
    # step of round k-3 carries the extra spare towards end[k-2]; the
    # final round inserts end[k-2] and end[k-1] directly.
    walk: list[LabelledClique] = [start]
    cur = list(start.members)

    def emit(new_cur: list[int]) -> None:
        z = LabelledClique(tuple(new_cur))
        assert _walk_property_holds(r_graph, walk[-1], z), "walk invariant broken"
        walk.append(z)

    def run_round(j: int, cur: list[int]) -> list[int] | None:
        if j == k - 2:
            # Two labelled inserts close the walk; check both before emitting
            # so failure never leaves a half-done suffix on the walk.
            states = []
            probe = cur
            for idx in (k - 2, k - 1):
                need = [c for t, c in enumerate(probe) if t != idx]
                if ends[idx] in need or any(
                    not r_graph.has_edge(ends[idx], c) for c in need
                ):
                    return None
                probe = probe.copy()
                probe[idx] = ends[idx]
                states.append(probe)
            for state in states:
                emit(state)
            return states[-1]
        def place(i: int, cur: list[int]) -> list[int] | None:
            if i == k:
                # Insert end[j]: adjacency is guaranteed by the spares.
                nxt = cur.copy()
                if ends[j] in (c for t, c in enumerate(cur) if t != j):
                    return None
                nxt[j] = ends[j]
                emit(nxt)
                out = run_round(j + 1, nxt)
                if out is None:
                    walk.pop()
                return out
            extra = [ends[j]]
            if j == k - 3 and i == k - 1:
                extra.append(ends[j + 1])
            for w in fresh(cur, i, extra, len(walk)):
                nxt = cur.copy()
                nxt[i] = w
                emit(nxt)
                out = place(i + 1, nxt)
                if out is not None:
                    return out
                walk.pop()
            return None

        return place(j + 1, cur)

    result = run_round(0, cur)
    if result is None:
        step, blocking = deepest[0]
        raise NoCommonNeighbour(step or 1, blocking or tuple(start.members))
    assert len(walk) == length, f"walk length {len(walk)} != {length}"
    return walk


__all__ = [
    "LabelledClique",
    "IntegerPartition",
    "NoCommonNeighbour",
    "backbone_graph",
    "kkr_graph",
    "augmented_backbone",
    "backbone_vertex",
    "backbone_coords",
    "k_equitable_targets",
    "clique_walk",
    "verify_clique_walk",
    "check_common_neighbour_precondition",
]
