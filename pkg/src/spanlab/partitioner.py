"""Cluster partitions of the host graph and assignments of the target graph.

build_cluster_partition is the desk-scale constructive analogue of the
host-side partition contract: a witness-tested regular partition grouped
into backbone columns, with badly-behaved vertices exiled to the
exceptional set.  assign_H is the block-scan construction for the
target-side contract, and verify_assignment checks the five contract
items (size windows, special-set budget, edge homomorphism, two-step
locality, first-segment pinning) independently of how an assignment was
produced.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, floor, sqrt

from .backbone import (
    IntegerPartition,
    backbone_coords,
    backbone_graph,
    backbone_vertex,
    kkr_graph,
)
from .graph import Graph, bits_of, mask_of
from .labelling import Colouring, Labelling, check_zero_free
from .regularity import (
    PairParams,
    build_regular_partition,
    p_density,
    test_lower_regular,
)
from .rng import CounterRng


class ColumnGroupingFailed(Exception):
    def __init__(self, message: str, reduced_min_degree: int):
        super().__init__(f"{message} (reduced graph min degree {reduced_min_degree})")
        self.reduced_min_degree = reduced_min_degree


class AssignmentFailed(Exception):
    """A contract item could not be satisfied; `item` names it."""

    def __init__(self, item: str, detail: str = ""):
        super().__init__(f"{item}: {detail}" if detail else item)
        self.item = item


class BudgetExceeded(Exception):
    def __init__(self, cluster: tuple[int, int], moved: int, budget: float):
        super().__init__(f"cluster {cluster} symmetric difference {moved} > budget {budget:.1f}")
        self.cluster = cluster


@dataclass
class ClusterPartition:
    """Exceptional set plus clusters over [r] x [k] with a reduced graph."""

    v0: frozenset
    clusters: dict  # (i, j) -> frozenset of g-vertices
    reduced: Graph  # on [r] x [k] flattened ids
    params: PairParams
    r: int
    k: int

    def validate(self, g: Graph) -> None:
        seen: set[int] = set(self.v0)
        count = len(self.v0)
        for key, cl in self.clusters.items():
            count += len(cl)
            if seen & cl:
                raise ValueError(f"cluster {key} overlaps earlier parts")
            seen |= cl
        if count != g.n or seen != set(range(g.n)):
            raise ValueError("clusters + v0 do not partition V(G)")
        for i in range(self.r):
            sizes = [len(self.clusters[(i, j)]) for j in range(self.k)]
            if max(sizes) - min(sizes) > 1:
                raise ValueError(f"column {i} not k-equitable: {sizes}")
        b = backbone_graph(self.r, self.k)
        if not b.is_subgraph_of(self.reduced):
            raise ValueError("backbone graph not contained in reduced graph")

    def cluster_sizes(self) -> list[list[int]]:
        return [
            [len(self.clusters[(i, j)]) for j in range(self.k)] for i in range(self.r)
        ]


@dataclass(frozen=True)
class Assignment:
    """f: V(H) -> [r] x [k] plus the special vertex set X."""

    f: tuple  # vertex -> (i, j)
    special: frozenset


@dataclass
class PartitionReport:
    g1_size_bounds: bool
    g2_regular_pairs: int
    g2_pairs_tested: int
    g2_witness_pairs: int
    g2_super_regular_columns: int
    g4_exiled: int
    super_exiled: int
    v0_size: int
    degree_slack: float
    notes: str = ""


def _greedy_k_clique(adj: dict, pool: list[int], k: int) -> list[int] | None:
    """Lowest-id-first k-clique in `pool` by backtracking."""

    def extend(members: list[int], cands: list[int]) -> list[int] | None:
        if len(members) == k:
            return members
        for idx, v in enumerate(cands):
            nxt = [u for u in cands[idx + 1:] if u in adj[v]]
            got = extend(members + [v], nxt)
            if got is not None:
                return got
        return None

    return extend([], pool)


def build_cluster_partition(
    g: Graph,
    gamma: Graph,
    k: int,
    r0: int,
    eps: float,
    d: float,
    p: float,
    *,
    degree_slack: float = 0.5,
    seed: int = 0,
    trials: int = 200,
    max_parts: int = 64,
) -> tuple[ClusterPartition, PartitionReport]:
    """Desk-scale host partition: regular parts, column grouping, exile.

    The gamma-degree balance exile uses (1 +- degree_slack) p |V_{i,j}|
    rather than the pair-testing eps; at desk scale cluster sizes are
    small enough that binomial noise would otherwise exile everything.
    """
    if not g.is_subgraph_of(gamma):
        raise ValueError("g must be a spanning subgraph of gamma")
    raw = build_regular_partition(
        g, p, eps, d, max(1, k * r0), seed=seed, trials=trials, max_parts=max_parts
    )
    parts = [set(q) for q in raw.parts]
    m = len(parts)
    deg = [0] * m
    adj: dict[int, set[int]] = {i: set() for i in range(m)}
    for i, j in raw.reduced_edges:
        adj[i].add(j)
        adj[j].add(i)
        deg[i] += 1
        deg[j] += 1
    red_min_deg = min(deg) if deg else 0

    # Greedy K_k cover of the reduced graph.
    pool = list(range(m))
    columns: list[list[int]] = []
    while len(pool) >= k:
        clique = _greedy_k_clique(adj, pool, k)
        if clique is None:
            break
        columns.append(clique)
        pool = [u for u in pool if u not in clique]
    if not columns or len(columns) < max(1, r0):
        raise ColumnGroupingFailed(
            f"found {len(columns)} K_{k} columns, need {max(1, r0)}", red_min_deg
        )
    # Order columns so that consecutive ones are fully cross-adjacent,
    # giving B^k_r inside the relabelled reduced graph.
    def compatible(c1, c2):
        return all(v in adj[u] for u in c1 for v in c2)

    order = [0]
    rest = list(range(1, len(columns)))
    while rest:
        nxt = next((c for c in rest if compatible(columns[order[-1]], columns[c])), None)
        if nxt is None:
            break
        order.append(nxt)
        rest.remove(nxt)
    if rest:
        # Drop columns that cannot be chained; their vertices go to v0.
        dropped = rest
    else:
        dropped = []
    if len(order) < max(1, r0):
        raise ColumnGroupingFailed(
            f"only {len(order)} chainable columns, need {max(1, r0)}", red_min_deg
        )

    v0 = set(raw.v0)
    for c in dropped:
        for part_idx in columns[c]:
            v0 |= parts[part_idx]
    pool_parts = [u for u in pool]
    for part_idx in pool_parts:
        v0 |= parts[part_idx]

    r = len(order)
    clusters = {
        (i, j): set(parts[columns[order[i]][j]]) for i in range(r) for j in range(k)
    }

    # Exile badly-behaved vertices: gamma-degree balance into every cluster
    # and the per-vertex super-regularity bound within the own column.
    g4_exiled = 0
    super_exiled = 0
    factor = d - eps
    cluster_masks = {key: mask_of(cl) for key, cl in clusters.items()}
    membership = {}
    for key, cl in clusters.items():
        for v in cl:
            membership[v] = key
    for v in sorted(membership):
        key = membership[v]
        bad = False
        for key2, msk in cluster_masks.items():
            size = len(clusters[key2])
            if size == 0:
                continue
            gdeg = (gamma.neighbour_bits(v) & msk).bit_count()
            if abs(gdeg - p * size) > degree_slack * p * size:
                bad = True
                break
        if not bad:
            i, j = key
            for j2 in range(k):
                if j2 == j:
                    continue
                msk = cluster_masks[(i, j2)]
                need = factor * max(
                    p * len(clusters[(i, j2)]),
                    (gamma.neighbour_bits(v) & msk).bit_count() / 2,
                )
                if (g.neighbour_bits(v) & msk).bit_count() < need:
                    bad = True
                    super_exiled += 1
                    break
        else:
            g4_exiled += 1
        if bad:
            clusters[key].discard(v)
            v0.add(v)
    # k-equitable repair inside each column: trim to the column minimum.
    for i in range(r):
        low = min(len(clusters[(i, j)]) for j in range(k))
        for j in range(k):
            cl = sorted(clusters[(i, j)])
            for v in cl[low:]:
                clusters[(i, j)].discard(v)
                v0.add(v)

    # Reduced graph on [r] x [k]: the backbone is kept structurally (it is
    # part of the output contract); other pairs join R when they test
    # regular and dense.  Witnesses anywhere are counted for the report.
    rk = r * k
    pp = PairParams(eps=eps, d=d, p=p)
    rng = CounterRng(seed + 1)
    edges = set(backbone_graph(r, k).edges())
    verdicts = {}
    regular_pairs = 0
    witness_pairs = 0
    tested = 0
    for a in range(rk):
        for b in range(a + 1, rk):
            ia, ja = backbone_coords(a, k)
            ib, jb = backbone_coords(b, k)
            ca, cb = clusters[(ia, ja)], clusters[(ib, jb)]
            if not ca or not cb:
                continue
            tested += 1
            verdict = test_lower_regular(g, pp, ca, cb, trials=trials, seed=rng.next_u64())
            verdicts[(a, b)] = verdict
            if verdict.is_witness:
                witness_pairs += 1
                continue
            regular_pairs += 1
            if p_density(g, p, ca, cb) >= d:
                edges.add((a, b))
    reduced = Graph(rk, edges)

    n = g.n
    sizes = [len(clusters[(i, j)]) for i in range(r) for j in range(k)]
    g1 = all(n / (4 * k * r) <= s <= 4 * n / (k * r) for s in sizes)
    super_cols = 0
    for i in range(r):
        ok = True
        for j in range(k):
            for j2 in range(j + 1, k):
                a = backbone_vertex(i, j, k)
                b = backbone_vertex(i, j2, k)
                verdict = verdicts.get((min(a, b), max(a, b)))
                if verdict is None or verdict.is_witness:
                    ok = False
        super_cols += ok

    part = ClusterPartition(
        v0=frozenset(v0),
        clusters={key: frozenset(cl) for key, cl in clusters.items()},
        reduced=reduced,
        params=pp,
        r=r,
        k=k,
    )
    part.validate(g)
    report = PartitionReport(
        g1_size_bounds=g1,
        g2_regular_pairs=regular_pairs,
        g2_pairs_tested=tested,
        g2_witness_pairs=witness_pairs,
        g2_super_regular_columns=super_cols,
        g4_exiled=g4_exiled,
        super_exiled=super_exiled,
        v0_size=len(v0),
        degree_slack=degree_slack,
    )
    return part, report


@dataclass(frozen=True)
class AssignmentReport:
    h1_size_windows: bool
    h2_special_budget: bool
    h3_edge_homomorphism: bool
    h4_two_step_locality: bool
    h5_first_segment: bool
    violations: tuple = ()

    @property
    def all_true(self) -> bool:
        return (
            self.h1_size_windows
            and self.h2_special_budget
            and self.h3_edge_homomorphism
            and self.h4_two_step_locality
            and self.h5_first_segment
        )


def _reduced_of(part) -> Graph:
    return part if isinstance(part, Graph) else part.reduced


def verify_assignment(
    h: Graph,
    a: Assignment,
    part,
    m: IntegerPartition,
    xi: float,
    lab: Labelling,
    col: Colouring,
    beta: float,
) -> AssignmentReport:
    """Check the five assignment contract items; `part` may be a
    ClusterPartition or the reduced graph directly."""
    reduced = _reduced_of(part)
    r, k = m.r, m.k
    n = h.n
    violations = []

    counts = [[0] * k for _ in range(r)]
    for v in range(n):
        i, j = a.f[v]
        counts[i][j] += 1
    h1 = True
    for i in range(r):
        for j in range(k):
            if not (m.values[i][j] - xi * n <= counts[i][j] <= m.values[i][j] + xi * n):
                h1 = False
                violations.append(("H1", (i, j), counts[i][j], m.values[i][j]))

    h2 = len(a.special) <= xi * n
    if not h2:
        violations.append(("H2", len(a.special)))

    h3 = True
    for u, v in h.edges():
        fu = backbone_vertex(*a.f[u], k)
        fv = backbone_vertex(*a.f[v], k)
        if fu == fv or not reduced.has_edge(fu, fv):
            h3 = False
            violations.append(("H3", (u, v), a.f[u], a.f[v]))
            break

    h4 = True
    for x in range(n):
        if x in a.special:
            continue
        i = a.f[x][0]
        for y in h.neighbours(x):
            if a.f[y][0] != i:
                h4 = False
                violations.append(("H4", x, y))
                break
            for z in h.neighbours(y):
                if a.f[z][0] != i:
                    h4 = False
                    violations.append(("H4", x, y, z))
                    break
            if not h4:
                break
        if not h4:
            break

    h5 = True
    head = ceil(sqrt(beta) * n)
    order = lab.order()
    for pos in range(min(head, n)):
        x = order[pos]
        if a.f[x] != (0, col.colour[x] - 1):
            h5 = False
            violations.append(("H5", x, a.f[x], col.colour[x]))
            break

    return AssignmentReport(h1, h2, h3, h4, h5, tuple(violations))


def _find_column_helpers(reduced: Graph, r: int, k: int) -> dict[int, int]:
    """z_i: a reduced vertex outside row i adjacent to the whole column i."""
    out = {}
    for i in range(r):
        col = [backbone_vertex(i, j, k) for j in range(k)]
        for q in range(reduced.n):
            qi, _ = backbone_coords(q, k)
            if qi != i and all(reduced.has_edge(q, c) for c in col):
                out[i] = q
                break
    return out


def assign_H(
    h: Graph,
    lab: Labelling,
    col: Colouring,
    reduced: Graph,
    m: IntegerPartition,
    xi: float,
    beta: float,
) -> Assignment:
    """Block-scan construction of the assignment contract.

    Scans the labelling in blocks of floor(4 k beta n); colour-c vertices
    of the current row i go to (i, c-1); the row advances when its
    cumulative count reaches the row target minus a xi n / 2 margin.
    Colour-0 vertices are routed through the row's helper vertex z_i and
    the surrounding 2 beta n window joins the special set, as does every
    row-transition window.  The result is verified before returning;
    any violated item raises AssignmentFailed.
    """
    n = h.n
    r, k = m.r, m.k
    if m.total != n:
        raise AssignmentFailed("H1", f"targets sum to {m.total}, H has {n} vertices")
    bw = lab.recompute_bandwidth(h)
    if bw > beta * n:
        raise AssignmentFailed("pre", f"bandwidth {bw} > beta*n = {beta * n:.1f}")
    if not col.is_proper(h):
        raise AssignmentFailed("pre", "colouring is not proper")
    if not check_zero_free(col, lab, ceil(10 / xi), beta, k):
        raise AssignmentFailed("pre", "colouring is not (10/xi, beta)-zero-free")
    order = lab.order()
    head = ceil(sqrt(beta) * n)
    if any(col.colour[order[pos]] == 0 for pos in range(min(head, n))):
        raise AssignmentFailed("pre", "colour zero appears in the first sqrt(beta) n vertices")
    helpers = _find_column_helpers(reduced, r, k)
    if len(helpers) < r:
        missing = [i for i in range(r) if i not in helpers]
        raise AssignmentFailed("pre", f"no z_i helper for rows {missing}")

    bs = floor(4 * k * beta * n)
    if bs < 1:
        raise AssignmentFailed("pre", "block size 4*k*beta*n below 1")
    # Row boundaries track cumulative targets so block-granularity drift
    # does not accumulate across rows; the safety margin is the spec's
    # xi n / 2 capped at half a block.  Two-step locality only reaches
    # 2 * bandwidth positions, so that is the special-set window.
    margin = min(xi * n / 2, bs / 2)
    window = 2 * max(1, bw)

    f: list[tuple[int, int] | None] = [None] * n
    special: set[int] = set()
    row = 0
    cum = []
    acc = 0
    for i in range(r):
        acc += sum(m.values[i])
        cum.append(acc)
    for block_start in range(0, n, bs):
        while row < r - 1 and block_start >= cum[row] - margin:
            row += 1
            for pos in range(max(0, block_start - window), min(n, block_start + window)):
                special.add(order[pos])
        for pos in range(block_start, min(n, block_start + bs)):
            x = order[pos]
            c = col.colour[x]
            if c == 0:
                f[x] = backbone_coords(helpers[row], k)
                # The two-step ball of positions within 2*bw of the routed
                # vertex sees the helper row; both endpoints inclusive.
                for q in range(max(0, pos - window), min(n, pos + window + 1)):
                    special.add(order[q])
            else:
                f[x] = (row, c - 1)

    assignment = Assignment(f=tuple(f), special=frozenset(special))
    report = verify_assignment(h, assignment, reduced, m, xi, lab, col, beta)
    if not report.all_true:
        first = next(
            item for item, flag in zip(
                ("H1", "H2", "H3", "H4", "H5"),
                (report.h1_size_windows, report.h2_special_budget,
                 report.h3_edge_homomorphism, report.h4_two_step_locality,
                 report.h5_first_segment),
            ) if not flag
        )
        raise AssignmentFailed(first, str(report.violations[:3]))
    return assignment


@dataclass(frozen=True)
class RebalanceReport:
    moves: int
    symmetric_difference: dict
    retested_pairs: int
    retest_witnesses: int


def rebalance(
    g: Graph,
    part: ClusterPartition,
    targets: IntegerPartition,
    budget: float,
    *,
    trials: int = 150,
    seed: int = 0,
) -> tuple[ClusterPartition, RebalanceReport]:
    """Move vertices between clusters until sizes match `targets` exactly.

    Vertices with most neighbours in the destination cluster move first;
    v0 is never touched; per-cluster symmetric difference above
    budget * n raises BudgetExceeded.  Touched pairs are re-tested for
    regularity and the counts reported.
    """
    r, k = part.r, part.k
    if targets.r != r or targets.k != k:
        raise ValueError("target shape mismatch")
    n = g.n
    sizes = {key: len(cl) for key, cl in part.clusters.items()}
    want = {(i, j): targets.values[i][j] for i in range(r) for j in range(k)}
    if sum(want.values()) != sum(sizes.values()):
        raise ValueError("targets total differs from current partition total")
    clusters = {key: set(cl) for key, cl in part.clusters.items()}
    gained: dict[tuple[int, int], int] = {key: 0 for key in clusters}
    lost: dict[tuple[int, int], int] = {key: 0 for key in clusters}
    moves = 0
    touched: set[tuple[int, int]] = set()
    cap = budget * n

    while True:
        over = [key for key in clusters if len(clusters[key]) > want[key]]
        under = [key for key in clusters if len(clusters[key]) < want[key]]
        if not over:
            break
        src = over[0]
        dst = under[0]
        dst_mask = mask_of(clusters[dst])
        v = max(
            sorted(clusters[src]),
            key=lambda u: (g.neighbour_bits(u) & dst_mask).bit_count(),
        )
        clusters[src].discard(v)
        clusters[dst].add(v)
        lost[src] += 1
        gained[dst] += 1
        moves += 1
        touched.add(src)
        touched.add(dst)
        if lost[src] + gained[src] > cap:
            raise BudgetExceeded(src, lost[src] + gained[src], cap)
        if lost[dst] + gained[dst] > cap:
            raise BudgetExceeded(dst, lost[dst] + gained[dst], cap)

    rng = CounterRng(seed)
    retested = 0
    witnesses = 0
    for key in sorted(touched):
        i, j = key
        for j2 in range(k):
            if j2 == j:
                continue
            other = clusters[(i, j2)]
            if not other or not clusters[key]:
                continue
            retested += 1
            verdict = test_lower_regular(
                g, part.params, clusters[key], other, trials=trials, seed=rng.next_u64()
            )
            witnesses += verdict.is_witness

    new_part = ClusterPartition(
        v0=part.v0,
        clusters={key: frozenset(cl) for key, cl in clusters.items()},
        reduced=part.reduced,
        params=part.params,
        r=r,
        k=k,
    )
    symdiff = {key: gained[key] + lost[key] for key in clusters}
    return new_part, RebalanceReport(moves, symdiff, retested, witnesses)


__all__ = [
    "ClusterPartition",
    "Assignment",
    "AssignmentReport",
    "PartitionReport",
    "RebalanceReport",
    "ColumnGroupingFailed",
    "AssignmentFailed",
    "BudgetExceeded",
    "build_cluster_partition",
    "verify_assignment",
    "assign_H",
    "rebalance",
]
