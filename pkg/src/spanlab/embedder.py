"""Pre-embedding over bad vertices, greedy candidate-set embedding, and
exact rooted subgraph search.

The rooted search pins one pattern vertex to an anchor and runs a
bitset DFS with forward checking over a static connected order, plus
orbit symmetry breaking from the pattern's root-stabilizer chain: when a
step's vertex has a nontrivial orbit under the automorphisms fixing all
earlier steps, its orbit mates are restricted to larger host ids, which
prunes each equivalence class of embeddings to one representative.  The
hot loop is numba-compiled with a pure-Python mirror as fallback.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import Graph, bits_of, common_neighbour_bits, mask_of
from .labelling import Colouring, Labelling, neighbourhood_colour_count
from .rng import CounterRng

try:
    from numba import njit, types
    from numba.extending import intrinsic

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap


if _HAVE_NUMBA:
    from llvmlite import ir as _ir

    @intrinsic
    def _hw_popcnt(typingctx, x):
        sig = types.uint64(types.uint64)

        def codegen(context, builder, signature, args):
            fn = builder.module.declare_intrinsic("llvm.ctpop", [_ir.IntType(64)])
            return builder.call(fn, [args[0]])

        return sig, codegen

    @intrinsic
    def _hw_cttz(typingctx, x):
        sig = types.uint64(types.uint64)

        def codegen(context, builder, signature, args):
            i64 = _ir.IntType(64)
            i1 = _ir.IntType(1)
            fnty = _ir.FunctionType(i64, [i64, i1])
            fn = builder.module.declare_intrinsic("llvm.cttz", [i64], fnty)
            return builder.call(fn, [args[0], _ir.Constant(i1, 0)])

        return sig, codegen


class NoEligibleRoot(Exception):
    pass


class EmptyCandidates(Exception):
    def __init__(self, vertex: int):
        super().__init__(f"candidate set emptied at target vertex {vertex}")
        self.vertex = vertex


@dataclass
class Embedding:
    """Partial injective vertex map V(H) -> V(G)."""

    map: dict = field(default_factory=dict)

    def domain(self) -> set:
        return set(self.map)

    def image(self) -> set:
        return set(self.map.values())

    def is_injective(self) -> bool:
        return len(set(self.map.values())) == len(self.map)


def verify_embedding(h: Graph, g: Graph, e: Embedding, *, require_total: bool = False) -> bool:
    """Injective on its domain and H-edges inside the domain map to G-edges."""
    if require_total and len(e.map) != h.n:
        return False
    if not e.is_injective():
        return False
    for u, v in h.edges():
        if u in e.map and v in e.map and not g.has_edge(e.map[u], e.map[v]):
            return False
    return True


# ---------------------------------------------------------------------------
# Exact rooted subgraph search.

ROOTED_PATTERN_CAP = 16


def _static_order(pattern: Graph, root: int) -> list[int]:
    """Root first, then greedily the vertex with most placed neighbours."""
    order = [root]
    placed = {root}
    while len(order) < pattern.n:
        best = None
        best_key = None
        for v in range(pattern.n):
            if v in placed:
                continue
            key = (
                sum(1 for u in pattern.neighbours(v) if u in placed),
                pattern.degree(v),
                -v,
            )
            if best_key is None or key > best_key:
                best, best_key = v, key
        order.append(best)
        placed.add(best)
    return order


def _automorphisms_fixing_root(pattern: Graph, root: int) -> list[tuple[int, ...]]:
    n = pattern.n
    degs = [pattern.degree(v) for v in range(n)]
    order = _static_order(pattern, root)
    perm = [-1] * n
    used = [False] * n
    out: list[tuple[int, ...]] = []

    def rec(i: int) -> None:
        if i == n:
            out.append(tuple(perm))
            return
        v = order[i]
        for w in range(n):
            if used[w] or degs[w] != degs[v]:
                continue
            if v == root and w != root:
                continue
            ok = True
            for u in order[:i]:
                if pattern.has_edge(v, u) != pattern.has_edge(w, perm[u]):
                    ok = False
                    break
            if ok:
                perm[v] = w
                used[w] = True
                rec(i + 1)
                used[w] = False
                perm[v] = -1

    rec(0)
    return out


def _symmetry_rules(pattern: Graph, root: int, order: list[int]) -> list[list[int]]:
    """Per order-step lists of later steps forced to take larger host ids.

    Walks the stabilizer chain of Aut(pattern) along `order`: at each
    step with a nontrivial orbit, the orbit mates (always later steps)
    must receive larger values, so each embedding class is searched once.
    """
    pos = {v: t for t, v in enumerate(order)}
    group = _automorphisms_fixing_root(pattern, root)
    rules: list[list[int]] = [[] for _ in order]
    for t, v in enumerate(order):
        if len(group) == 1:
            break
        orbit = {perm[v] for perm in group}
        if len(orbit) > 1:
            rules[t] = sorted(pos[w] for w in orbit if w != v)
        group = [perm for perm in group if perm[v] == v]
    return rules


@njit(inline="always")
def _ctz(x):
    return int(_hw_cttz(x))


@njit(cache=True)
def _next_bit(row, start, words):
    w0 = start >> 6
    if w0 >= words:
        return -1
    x = row[w0] & (~np.uint64(0) << np.uint64(start & 63))
    if x != np.uint64(0):
        return (w0 << 6) + _ctz(x)
    for w in range(w0 + 1, words):
        if row[w] != np.uint64(0):
            return (w << 6) + _ctz(row[w])
    return -1


@njit(inline="always")
def _popcnt64(x):
    return _hw_popcnt(x)


@njit(cache=True)
def _row_count_bounded(row, lo, hi):
    c = np.uint64(0)
    for w in range(lo, hi):
        c += _popcnt64(row[w])
    return int(c)


@njit(inline="always")
def _next_bit_bounded(row, start, lo, hi):
    w0 = start >> 6
    if w0 < lo:
        w0 = lo
        start = lo << 6
    if w0 >= hi:
        return -1
    x = row[w0] & (~np.uint64(0) << np.uint64(start & 63))
    if x != np.uint64(0):
        return (w0 << 6) + _ctz(x)
    for w in range(w0 + 1, hi):
        if row[w] != np.uint64(0):
            return (w << 6) + _ctz(row[w])
    return -1


TINY_ROW_CAP = 32
USE_MRV = False


@njit(inline="always")
def _recount(row, lo, hi):
    """(exact count, tightened lo, hi) of a bounded row."""
    c = np.uint64(0)
    nlo = hi
    nhi = lo
    for w in range(lo, hi):
        x = row[w]
        if x != np.uint64(0):
            c += _popcnt64(x)
            if w < nlo:
                nlo = w
            nhi = w + 1
    return int(c), nlo, nhi


@njit(cache=True)
def _rooted_kernel(g_bits, words, pn, p_adj, lt_ptr, lt_idx, gt_ptr, gt_idx,
                   rank, root_idx, anchor, n, la_cap, mrv):
    """Fail-first bitset DFS with snapshotted candidate rows.

    At each depth the unassigned pattern vertex with the tightest row is
    branched (ties by static rank); row tightness is exact for rows
    living in at most two words and a per-word proxy otherwise.  Rows
    carry live word bounds [lo, hi) so sets concentrated in an id range
    cost proportionally less.  Rows with at most la_cap values are
    expanded (a bitwise OR of their values' adjacency rows) and pruned
    into their unassigned pattern neighbours, which removes values that
    could only die one level deeper.  The lt/gt arrays carry the orbit
    symmetry relations phi(u) < phi(m), applied from whichever side is
    assigned first."""
    cand = np.zeros((pn + 1, pn, words), dtype=np.uint64)
    cnt = np.zeros((pn + 1, pn), dtype=np.int64)
    lo = np.zeros((pn + 1, pn), dtype=np.int64)
    hi = np.zeros((pn + 1, pn), dtype=np.int64)
    exp = np.zeros(words, dtype=np.uint64)
    scratch = np.zeros(pn, dtype=np.int64)
    full = n >> 6
    rem = n & 63
    for s in range(pn):
        for w in range(full):
            cand[0, s, w] = ~np.uint64(0)
        if rem:
            cand[0, s, full] = (np.uint64(1) << np.uint64(rem)) - np.uint64(1)
        cnt[0, s] = n
        hi[0, s] = words
    aw = anchor >> 6
    for w in range(words):
        cand[0, root_idx, w] = np.uint64(0)
    cand[0, root_idx, aw] = np.uint64(1) << np.uint64(anchor & 63)
    cnt[0, root_idx] = 1
    lo[0, root_idx] = aw
    hi[0, root_idx] = aw + 1

    sel = np.full(pn, -1, dtype=np.int64)
    val = np.full(pn, -1, dtype=np.int64)
    cursor = np.zeros(pn, dtype=np.int64)
    assigned = np.zeros(pn, dtype=np.uint8)
    sel[0] = root_idx
    nodes = 0
    depth = 0
    while True:
        u = sel[depth]
        v = _next_bit_bounded(cand[depth, u], cursor[depth], lo[depth, u], hi[depth, u])
        if v < 0:
            depth -= 1
            if depth < 0:
                return sel, val, nodes, False
            assigned[sel[depth]] = 0
            continue
        nodes += 1
        cursor[depth] = v + 1
        val[depth] = v
        if depth == pn - 1:
            return sel, val, nodes, True
        # Forward-check into the next snapshot, bounds fused with the AND.
        vw = v >> 6
        vb = np.uint64(1) << np.uint64(v & 63)
        ok = True
        live = 0
        for s in range(pn):
            if not assigned[s] and s != u:
                scratch[live] = s
                live += 1
        # Tightest rows first: an empty result skips the wide rows entirely.
        for i in range(1, live):
            key = scratch[i]
            kc = cnt[depth, key]
            j = i - 1
            while j >= 0 and cnt[depth, scratch[j]] > kc:
                scratch[j + 1] = scratch[j]
                j -= 1
            scratch[j + 1] = key
        for si in range(live):
            s = scratch[si]
            slo = lo[depth, s]
            shi = hi[depth, s]
            if p_adj[u] >> np.uint64(s) & np.uint64(1):
                nlo = shi
                nhi = slo
                for w in range(slo, shi):
                    x = cand[depth, s, w] & g_bits[v, w]
                    cand[depth + 1, s, w] = x
                    if x != np.uint64(0):
                        if w < nlo:
                            nlo = w
                        nhi = w + 1
                if nlo <= vw < nhi:
                    cand[depth + 1, s, vw] &= ~vb
                total, nlo, nhi = _recount(cand[depth + 1, s], nlo, nhi)
            else:
                for w in range(slo, shi):
                    cand[depth + 1, s, w] = cand[depth, s, w]
                total = cnt[depth, s]
                nlo = slo
                nhi = shi
                if nlo <= vw < nhi and cand[depth + 1, s, vw] & vb:
                    cand[depth + 1, s, vw] &= ~vb
                    total -= 1
            cnt[depth + 1, s] = total
            lo[depth + 1, s] = nlo
            hi[depth + 1, s] = max(nlo, nhi)
            if total == 0:
                ok = False
                break
        if ok:
            # Orbit value relations: mates of u stay above v, sources below.
            for t in range(lt_ptr[u], lt_ptr[u + 1]):
                m = lt_idx[t]
                if assigned[m] or m == u:
                    continue
                nlo = max(lo[depth + 1, m], vw)
                if nlo < hi[depth + 1, m] and nlo == vw:
                    cand[depth + 1, m, vw] &= ~((vb << np.uint64(1)) - np.uint64(1))
                total, nlo, nhi = _recount(cand[depth + 1, m], nlo, hi[depth + 1, m])
                cnt[depth + 1, m] = total
                lo[depth + 1, m] = nlo
                hi[depth + 1, m] = max(nlo, nhi)
                if total == 0:
                    ok = False
                    break
            if ok:
                for t in range(gt_ptr[u], gt_ptr[u + 1]):
                    m = gt_idx[t]
                    if assigned[m] or m == u:
                        continue
                    nhi = min(hi[depth + 1, m], vw + 1)
                    if lo[depth + 1, m] < nhi and nhi == vw + 1:
                        cand[depth + 1, m, vw] &= vb - np.uint64(1)
                    total, nlo, nhi = _recount(cand[depth + 1, m], lo[depth + 1, m], nhi)
                    cnt[depth + 1, m] = total
                    lo[depth + 1, m] = nlo
                    hi[depth + 1, m] = max(nlo, nhi)
                    if total == 0:
                        ok = False
                        break
        if ok:
            # Expansion filter: every tiny row ORs its values' adjacency
            # rows and prunes its unassigned pattern neighbours.  Sound:
            # a value without a potential partner in an adjacent row can
            # never complete an embedding.
            for s2 in range(pn):
                if assigned[s2] or s2 == u or cnt[depth + 1, s2] > la_cap:
                    continue
                if cnt[depth + 1, s2] == cnt[depth, s2]:
                    continue
                ulo = words
                uhi = 0
                for s in range(pn):
                    if assigned[s] or s == s2 or s == u:
                        continue
                    if p_adj[s2] >> np.uint64(s) & np.uint64(1):
                        if lo[depth + 1, s] < ulo:
                            ulo = lo[depth + 1, s]
                        if hi[depth + 1, s] > uhi:
                            uhi = hi[depth + 1, s]
                if ulo >= uhi:
                    continue
                for w in range(ulo, uhi):
                    exp[w] = np.uint64(0)
                y = (lo[depth + 1, s2] << 6) - 1
                while True:
                    y = _next_bit_bounded(
                        cand[depth + 1, s2], y + 1, lo[depth + 1, s2], hi[depth + 1, s2]
                    )
                    if y < 0:
                        break
                    for w in range(ulo, uhi):
                        exp[w] |= g_bits[y, w]
                for s in range(pn):
                    if assigned[s] or s == s2 or s == u:
                        continue
                    if not (p_adj[s2] >> np.uint64(s) & np.uint64(1)):
                        continue
                    slo = lo[depth + 1, s]
                    shi = hi[depth + 1, s]
                    changed = False
                    for w in range(slo, shi):
                        x = cand[depth + 1, s, w] & exp[w]
                        if x != cand[depth + 1, s, w]:
                            changed = True
                        cand[depth + 1, s, w] = x
                    if changed:
                        total, nlo, nhi = _recount(cand[depth + 1, s], slo, shi)
                        cnt[depth + 1, s] = total
                        lo[depth + 1, s] = nlo
                        hi[depth + 1, s] = max(nlo, nhi)
                        if total == 0:
                            ok = False
                            break
                if not ok:
                    break
        if not ok:
            continue
        assigned[u] = 1
        depth += 1
        # Fail-first selection: tightest row, ties by static rank (or the
        # static order alone when MRV is disabled).
        best = -1
        best_c = np.int64(1) << 60
        best_r = np.int64(1) << 60
        for s in range(pn):
            if assigned[s]:
                continue
            c = cnt[depth, s] if mrv else 0
            if c < best_c or (c == best_c and rank[s] < best_r):
                best, best_c, best_r = s, c, rank[s]
        sel[depth] = best
        cursor[depth] = 0


def _rooted_python(g: Graph, pattern: Graph, order, rules, anchor):
    """Pure-Python mirror of the kernel, used when numba is unavailable."""
    n = g.n
    pn = pattern.n
    full_mask = (1 << n) - 1
    step_adj = [
        [pattern.has_edge(order[a], order[b]) for b in range(pn)] for a in range(pn)
    ]
    cand = [[full_mask] * pn for _ in range(pn + 1)]
    cand[0][0] = 1 << anchor
    chosen = [-1] * pn
    cursor = [0] * pn
    depth = 0
    while True:
        row = cand[depth][depth] >> cursor[depth]
        if row == 0:
            depth -= 1
            if depth < 0:
                return None
            continue
        v = cursor[depth] + (row & -row).bit_length() - 1
        cursor[depth] = v + 1
        if depth == pn - 1:
            chosen[depth] = v
            return chosen
        ok = True
        gt_mask = full_mask ^ ((1 << (v + 1)) - 1)
        for s in range(depth + 1, pn):
            x = cand[depth][s]
            if step_adj[depth][s]:
                x &= g.neighbour_bits(v)
            x &= ~(1 << v)
            if s in rules[depth]:
                x &= gt_mask
            cand[depth + 1][s] = x
            if x == 0:
                ok = False
        if not ok:
            continue
        chosen[depth] = v
        depth += 1
        cursor[depth] = 0


def find_rooted_copy(
    g: Graph, pattern: Graph, root: int, anchor: int
) -> dict[int, int] | None:
    """Injective edge-preserving map of `pattern` into g with root -> anchor.

    Exhaustive: returns None only after the (symmetry-reduced) search
    space is exhausted.  Patterns are capped at 16 vertices.
    """
    if pattern.n > ROOTED_PATTERN_CAP:
        raise ValueError(f"pattern has {pattern.n} > {ROOTED_PATTERN_CAP} vertices")
    if not 0 <= root < pattern.n or not 0 <= anchor < g.n:
        raise ValueError("root/anchor out of range")
    if pattern.n > g.n:
        return None
    order = _static_order(pattern, root)
    rules = _symmetry_rules(pattern, root, order)
    if _HAVE_NUMBA:
        pn = pattern.n
        p_adj = np.zeros(pn, dtype=np.uint64)
        for a in range(pn):
            for b in pattern.neighbours(a):
                p_adj[a] |= np.uint64(1) << np.uint64(b)
        # phi(order[t]) < phi(mate) relations, indexed from both sides.
        lt: list[list[int]] = [[] for _ in range(pn)]
        gt: list[list[int]] = [[] for _ in range(pn)]
        for t, steps in enumerate(rules):
            src = order[t]
            for s in steps:
                lt[src].append(order[s])
                gt[order[s]].append(src)

        def csr(rows):
            ptr = np.zeros(pn + 1, dtype=np.int64)
            flat: list[int] = []
            for i, row in enumerate(rows):
                flat.extend(row)
                ptr[i + 1] = len(flat)
            return ptr, np.asarray(flat or [0], dtype=np.int64)

        lt_ptr, lt_idx = csr(lt)
        gt_ptr, gt_idx = csr(gt)
        rank = np.zeros(pn, dtype=np.int64)
        for t, v in enumerate(order):
            rank[v] = t
        bm = g.bit_matrix()
        sel, val, _, found = _rooted_kernel(
            bm, bm.shape[1], pn, p_adj, lt_ptr, lt_idx, gt_ptr, gt_idx,
            rank, root, anchor, g.n, TINY_ROW_CAP, USE_MRV,
        )
        if not found:
            return None
        return {int(sel[t]): int(val[t]) for t in range(pn)}
    chosen = _rooted_python(g, pattern, order, [set(rs) for rs in rules], anchor)
    if chosen is None:
        return None
    return {order[t]: chosen[t] for t in range(pn)}


# ---------------------------------------------------------------------------
# Greedy candidate-set embedding (blow-up lemma stand-in).


@dataclass(frozen=True)
class FailureCert:
    """Names the first vertex whose candidate set emptied."""

    vertex: int
    depth: int
    backtracks: int

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "depth": self.depth, "backtracks": self.backtracks}


@dataclass(frozen=True)
class RestrictionRecord:
    """Image restriction for a boundary vertex of the pre-embedding.

    I is carved from the common G-neighbourhood of the restricting
    vertices J inside the named target cluster (the sample set when no
    cluster partition is in play).
    """

    vertex: int
    restricting: frozenset
    allowed: frozenset
    target_cluster: tuple[int, int] | None
    cluster_members: frozenset

    def __post_init__(self):
        if not self.allowed:
            raise EmptyCandidates(self.vertex)
        if not self.allowed <= self.cluster_members:
            raise ValueError("allowed set leaves the target cluster")

    def validate(self, g: Graph, h: Graph) -> bool:
        """I inside CN_G(J) cap cluster, and |J| + unembedded degree <= Delta(h)."""
        common = common_neighbour_bits(g, self.restricting)
        inside = all(common >> v & 1 for v in self.allowed)
        delta = max(h.degree(v) for v in range(h.n))
        unembedded_deg = h.degree(self.vertex) - len(self.restricting)
        return inside and len(self.restricting) + unembedded_deg <= delta


@dataclass(frozen=True)
class PreEmbedConfig:
    """Colour budget s, root separation, sample fraction, seed."""

    s: int
    separation: int
    mu: float = 0.25
    seed: int = 0

    def __post_init__(self):
        if self.s < 1:
            raise ValueError("s must be at least 1")
        if self.separation < 2 * self.s + 2:
            raise ValueError("separation must be at least 2s + 2")


@dataclass
class PreEmbedStep:
    bad_vertex: int
    root: int
    overlap: int                      # |N_G(v) cap S cap Im(phi)| at choice time
    embedded: list = field(default_factory=list)  # (h_vertex, g_vertex) in order


@dataclass
class PreEmbedResult:
    embedding: Embedding
    records: list
    steps: list


def _h_distances(h: Graph, sources: Iterable[int], limit: int) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    frontier = list(dist)
    d = 0
    while frontier and d < limit:
        d += 1
        nxt = []
        for u in frontier:
            for w in h.neighbours(u):
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def pre_embed(
    g: Graph,
    h: Graph,
    v0: Iterable[int],
    S: Iterable[int],
    col: Colouring,
    cfg: PreEmbedConfig,
) -> PreEmbedResult:
    """Cover the bad vertices by far-apart low-colour-degree roots of H.

    Loop of the pre-embedding algorithm: the uncovered bad vertex with
    most G-neighbours inside S already used by the embedding is chosen
    (ties to lowest id), a fresh eligible root x is embedded onto it,
    the radius-s ball around x goes greedily into the sample set, and
    the distance-(s+1) boundary receives restriction records.
    """
    bad = sorted(set(v0))
    sample = set(S)
    if set(bad) & sample:
        raise ValueError("v0 and S must be disjoint")
    for v in bad:
        nb_in_s = g.neighbour_bits(v) & mask_of(sample)
        if _cliques_in_mask(g, nb_in_s, cfg.s) == 0:
            raise ValueError(
                f"bad vertex {v} has no {cfg.s}-clique in its S-neighbourhood"
            )
    eligible = [
        x for x in range(h.n) if neighbourhood_colour_count(h, col, x) <= cfg.s
    ]
    rng = CounterRng(cfg.seed)
    emb = Embedding()
    records: list[RestrictionRecord] = []
    steps: list[PreEmbedStep] = []
    remaining = set(bad)
    used_roots: set[int] = set()

    while remaining:
        s_im = mask_of(sample & emb.image())
        best_v = min(
            remaining,
            key=lambda v: (-(g.neighbour_bits(v) & s_im).bit_count(), v),
        )
        overlap = (g.neighbour_bits(best_v) & s_im).bit_count()
        dist_from_dom = _h_distances(h, emb.domain(), cfg.separation)
        root = next(
            (
                x for x in eligible
                if x not in used_roots
                and x not in emb.map
                and dist_from_dom.get(x, cfg.separation) >= cfg.separation
            ),
            None,
        )
        if root is None:
            raise NoEligibleRoot(
                f"no root with colour budget {cfg.s} at distance {cfg.separation}"
            )
        used_roots.add(root)
        step = PreEmbedStep(bad_vertex=best_v, root=root, overlap=overlap)

        ball = _h_distances(h, [root], cfg.s + 1)
        boundary = sorted(y for y, d in ball.items() if d == cfg.s + 1)
        interior = sorted(
            (y for y, d in ball.items() if d <= cfg.s), key=lambda y: (ball[y], y)
        )
        avail = mask_of(sample - emb.image())
        local: dict[int, int] = {}
        for y in interior:
            if y == root:
                local[y] = best_v
                step.embedded.append((y, best_v))
                continue
            cands = avail
            for u in h.neighbours(y):
                if u in local:
                    cands &= g.neighbour_bits(local[u])
            cand_list = list(bits_of(cands))
            if not cand_list:
                raise EmptyCandidates(y)
            img = cand_list[rng.randrange(len(cand_list))]
            local[y] = img
            avail &= ~(1 << img)
            step.embedded.append((y, img))
        emb.map.update(local)

        scope = sample - emb.image()
        scope_mask = mask_of(scope)
        for y in boundary:
            restricting = frozenset(local[u] for u in h.neighbours(y) if u in local)
            allowed_mask = common_neighbour_bits(g, restricting) & scope_mask
            records.append(
                RestrictionRecord(
                    vertex=y,
                    restricting=restricting,
                    allowed=frozenset(bits_of(allowed_mask)),
                    target_cluster=None,
                    cluster_members=frozenset(scope),
                )
            )
        steps.append(step)
        remaining.discard(best_v)

    assert verify_embedding(h, g, emb)
    return PreEmbedResult(embedding=emb, records=records, steps=steps)


def _cliques_in_mask(g: Graph, mask: int, s: int) -> int:
    from .graph import _count_cliques_in_mask

    return _count_cliques_in_mask(g._adj, mask, s)


def greedy_embed(
    h: Graph,
    g: Graph,
    lab: Labelling,
    assignment=None,
    restrictions: Sequence[RestrictionRecord] = (),
    backtrack_budget: int = 100_000,
    seed: int = 0,
    clusters: Mapping | None = None,
    forced: Mapping[int, int] | None = None,
) -> Embedding | FailureCert:
    """Candidate-set greedy embedding in bandwidth order with backtracking.

    Restricted vertices come first; every vertex draws uniformly (seeded)
    from the common neighbourhood of its already-placed H-neighbours
    intersected with its scope (restriction set, assigned cluster, or all
    of V).  Chronological backtracking burns one unit of budget per
    retreat; exhaustion yields a FailureCert naming the first vertex
    whose candidates emptied.
    """
    n = h.n
    full_mask = (1 << g.n) - 1
    restricted = {rec.vertex: rec for rec in restrictions}
    scope = [full_mask] * n
    for v, rec in restricted.items():
        scope[v] = mask_of(rec.allowed)
    if assignment is not None and clusters is not None:
        for v in range(n):
            if v not in restricted:
                scope[v] = mask_of(clusters[assignment.f[v]])
    fixed = dict(forced or {})

    order = sorted(
        (v for v in range(n) if v not in fixed),
        key=lambda v: (v not in restricted, lab.position[v]),
    )
    rng = CounterRng(seed)
    images: dict[int, int] = dict(fixed)
    used = mask_of(fixed.values())
    stack: list[tuple[int, list[int], int]] = []  # vertex, remaining candidates, image
    backtracks = 0
    first_empty = None

    t = 0
    while t < len(order):
        v = order[t]
        cands_mask = scope[v] & ~used
        for u in h.neighbours(v):
            if u in images:
                cands_mask &= g.neighbour_bits(images[u])
        cand_list = list(bits_of(cands_mask))
        if cand_list:
            pick = cand_list.pop(rng.randrange(len(cand_list)))
            images[v] = pick
            used |= 1 << pick
            stack.append((v, cand_list, pick))
            t += 1
            continue
        if first_empty is None:
            first_empty = v
        # Chronological backtrack: retry the previous vertex on its
        # remaining candidates.
        while True:
            if not stack:
                return FailureCert(vertex=first_empty, depth=t, backtracks=backtracks)
            backtracks += 1
            if backtracks > backtrack_budget:
                return FailureCert(vertex=first_empty, depth=t, backtracks=backtracks)
            pv, rest, img = stack.pop()
            del images[pv]
            used &= ~(1 << img)
            t -= 1
            if rest:
                pick = rest.pop(rng.randrange(len(rest)))
                images[pv] = pick
                used |= 1 << pick
                stack.append((pv, rest, pick))
                t += 1
                break

    emb = Embedding(dict(images))
    assert verify_embedding(h, g, emb, require_total=True)
    return emb


__all__ = [
    "Embedding",
    "RestrictionRecord",
    "PreEmbedConfig",
    "PreEmbedResult",
    "PreEmbedStep",
    "FailureCert",
    "NoEligibleRoot",
    "EmptyCandidates",
    "ROOTED_PATTERN_CAP",
    "verify_embedding",
    "find_rooted_copy",
    "pre_embed",
    "greedy_embed",
]
