"""The adversarial counterexample family and neighbourhood-clearing adversary.

The pattern graph F: vertices 1,2,3,4 form a clique, a,b,c,d,e,f form a
six-cycle, 4 is joined to all of a..f, 1 to b,c,e,f, 2 to a,c,d,f, 3 to
a,b,d,e, and a root vertex r is adjacent to a..f.  The structured
adversary keeps, inside a sampled host graph, exactly the edges X-Y,
Y1-Y2, Y1-(Z minus Z1), Y2-(Z minus Z2), and cross-part Z edges; every
F-copy through X is then impossible, which verify_no_F_on_X certifies by
exhaustive rooted search.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, log

from .graph import Graph, GnpParams, bits_of, generate_gnp, mask_of, min_degree
from .rng import CounterRng, derive

# Vertex ids of F: the K_4 side, the hexagon, then the root.
F_NAMES = {
    "1": 0, "2": 1, "3": 2, "4": 3,
    "a": 4, "b": 5, "c": 6, "d": 7, "e": 8, "f": 9,
    "r": 10,
}

_F_EDGE_SPEC = (
    "12 13 14 23 24 34 "          # clique on 1,2,3,4
    "ab bc cd de ef fa "          # hexagon
    "4a 4b 4c 4d 4e 4f "          # 4 joined to the cycle
    "1b 1c 1e 1f "
    "2a 2c 2d 2f "
    "3a 3b 3d 3e "
    "ra rb rc rd re rf"           # root
)


class AssertionFailed(Exception):
    """A structural self-test of the F construction failed."""

    def __init__(self, prop: str):
        super().__init__(f"F self-test violated: {prop}")
        self.prop = prop


class RetriesExhausted(Exception):
    """Host-graph typicality checks kept failing across resamples."""


def build_F() -> Graph:
    """The 11-vertex pattern graph F with its 36 construction edges."""
    edges = [(F_NAMES[e[0]], F_NAMES[e[1]]) for e in _F_EDGE_SPEC.split()]
    return Graph(11, edges)


def _proper_colourings(g: Graph, colours: int) -> list[tuple[int, ...]]:
    """All proper colourings with the given palette, by backtracking."""
    out: list[tuple[int, ...]] = []
    col = [-1] * g.n

    def rec(v: int) -> None:
        if v == g.n:
            out.append(tuple(col))
            return
        seen = {col[u] for u in g.neighbours(v) if col[u] >= 0}
        for c in range(colours):
            if c not in seen:
                col[v] = c
                rec(v + 1)
                col[v] = -1

    rec(0)
    return out


@dataclass(frozen=True)
class FReport:
    chromatic_number: int
    colouring_count: int
    forced_classes: tuple[frozenset, ...]
    k4_members: frozenset
    root_neighbourhood_is_c6: bool


def analyze_F() -> FReport:
    """Exhaustive self-test of the F construction.

    Checks chi(F) = 4, the forced colour classes {1,a,d}, {2,b,e},
    {3,c,f} (and {4,r}), K_4-membership of every vertex except r, and
    that N(r) induces a six-cycle.  Raises AssertionFailed if any fails.
    """
    f = build_F()
    if _proper_colourings(f, 3):
        raise AssertionFailed("chi(F) <= 3")
    cols = _proper_colourings(f, 4)
    if not cols:
        raise AssertionFailed("F is not 4-colourable")

    names = {v: s for s, v in F_NAMES.items()}
    want = [frozenset("1ad"), frozenset("2be"), frozenset("3cf"), frozenset("4r")]
    for col in cols:
        classes: dict[int, set[str]] = {}
        for v, c in enumerate(col):
            classes.setdefault(c, set()).add(names[v])
        parts = {frozenset(s) for s in classes.values()}
        if parts != set(want):
            raise AssertionFailed(f"unforced colour classes {parts}")

    from .graph import count_cliques_in_neighbourhood

    in_k4 = frozenset(
        v for v in range(f.n) if count_cliques_in_neighbourhood(f, v, 3) >= 1
    )
    if in_k4 != frozenset(range(f.n)) - {F_NAMES["r"]}:
        raise AssertionFailed("K_4 membership is not V(F) minus r")

    r = F_NAMES["r"]
    nbhd = sorted(f.neighbours(r))
    c6 = (
        len(nbhd) == 6
        and all(sum(1 for u in nbhd if f.has_edge(u, w)) == 2 for w in nbhd)
        and count_cliques_in_neighbourhood(f, r, 3) == 0
        and _connected_on(f, nbhd)
    )
    if not c6:
        raise AssertionFailed("N(r) is not a six-cycle")

    return FReport(
        chromatic_number=4,
        colouring_count=len(cols),
        forced_classes=tuple(want),
        k4_members=in_k4,
        root_neighbourhood_is_c6=True,
    )


def _connected_on(g: Graph, vertices: list[int]) -> bool:
    inside = set(vertices)
    seen = {vertices[0]}
    stack = [vertices[0]]
    while stack:
        u = stack.pop()
        for w in g.neighbours(u):
            if w in inside and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == inside


@dataclass
class AdversaryInstance:
    """A host graph, its structured spanning subgraph, and the part structure."""

    gamma: Graph
    g: Graph
    x_set: frozenset
    y1: frozenset
    y2: frozenset
    z_parts: tuple[frozenset, ...]
    n: int
    p: float
    eps: float
    seed: int

    def part_of(self, v: int) -> str:
        if v in self.x_set:
            return "X"
        if v in self.y1:
            return "Y1"
        if v in self.y2:
            return "Y2"
        for i, z in enumerate(self.z_parts):
            if v in z:
                return f"Z{i + 1}"
        raise ValueError(f"vertex {v} in no part")

    def edge_permitted(self, u: int, v: int) -> bool:
        pu, pv = sorted((self.part_of(u), self.part_of(v)))
        if pu == "X":
            return pv.startswith("Y")
        if pu == "Y1":
            return pv == "Y2" or (pv.startswith("Z") and pv != "Z1")
        if pu == "Y2":
            return pv.startswith("Z") and pv != "Z2"
        if pu.startswith("Z"):
            return pv.startswith("Z") and pu != pv
        return False


def _split_even(rng: CounterRng, items: list[int], parts: int) -> list[frozenset]:
    pool = list(items)
    rng.shuffle(pool)
    base, extra = divmod(len(pool), parts)
    out, at = [], 0
    for i in range(parts):
        size = base + (1 if i < extra else 0)
        out.append(frozenset(pool[at:at + size]))
        at += size
    return out


def build_adversarial_instance(
    n: int, p: float, eps: float, seed: int, *, z_parts: int = 5, retries: int = 20
) -> AdversaryInstance:
    """Build the structured adversary inside a fresh host graph.

    |X| = ceil(eps/p); typicality (every X-vertex has <= log n
    neighbours inside X, and |N(X) minus X| <= 2 eps n) is checked and
    the host resampled on failure, up to `retries` attempts.
    """
    x_size = ceil(eps / p)
    if x_size < 1 or x_size >= n // 4:
        raise ValueError(f"|X| = {x_size} out of range for n = {n}")
    for attempt in range(retries):
        sub = derive(seed, attempt)
        rng = CounterRng(derive(sub, 1))
        gamma = generate_gnp(GnpParams(n, p, sub))
        xs = frozenset(rng.sample(range(n), x_size))
        x_mask = mask_of(xs)
        y_mask = 0
        for x in xs:
            y_mask |= gamma.neighbour_bits(x)
        y_mask &= ~x_mask
        ys = sorted(bits_of(y_mask))
        if p < 1.0 and len(ys) > 2 * eps * n:
            continue
        if any((gamma.neighbour_bits(x) & x_mask).bit_count() > log(n) for x in xs):
            continue
        y_halves = _split_even(rng, ys, 2)
        zs = [v for v in range(n) if not (x_mask >> v & 1) and not (y_mask >> v & 1)]
        z_sets = _split_even(rng, zs, z_parts)
        inst = AdversaryInstance(
            gamma=gamma,
            g=gamma,  # placeholder, replaced below
            x_set=xs,
            y1=y_halves[0],
            y2=y_halves[1],
            z_parts=tuple(z_sets),
            n=n, p=p, eps=eps, seed=seed,
        )
        kept = [(u, v) for u, v in gamma.edges() if inst.edge_permitted(u, v)]
        inst.g = Graph(n, kept)
        return inst
    raise RetriesExhausted(f"no typical host in {retries} attempts at n={n}, p={p}, eps={eps}")


def verify_no_F_on_X(inst: AdversaryInstance, pattern: Graph | None = None) -> bool:
    """True iff no copy of the pattern uses any X-vertex, in any role.

    Runs the exact rooted search for every (anchor in X, pattern vertex)
    pair; the root vertex r is searched last since it is the expensive,
    structurally interesting case.  The instance is relabelled so each
    part occupies a contiguous id range, which keeps the search kernel's
    candidate rows short (non-containment is isomorphism-invariant).
    """
    from .embedder import find_rooted_copy

    import numpy as np

    pat = pattern if pattern is not None else build_F()
    new_order = (
        sorted(inst.x_set) + sorted(inst.y1) + sorted(inst.y2)
        + [v for z in inst.z_parts for v in sorted(z)]
    )
    n = inst.g.n
    # Permute the packed adjacency with numpy; rebuilding 10^5-10^6 edges
    # through Python tuples costs more than every cheap rooted search.
    words = (n + 63) // 64
    bits = np.unpackbits(
        inst.g.bit_matrix().view(np.uint8), axis=1, bitorder="little", count=n
    ).astype(bool)
    perm = np.asarray(new_order, dtype=np.int64)
    bits = bits[perm][:, perm]
    packed = np.packbits(bits, axis=1, bitorder="little")
    pad = np.zeros((n, words * 8 - packed.shape[1]), dtype=np.uint8)
    packed = np.concatenate([packed, pad], axis=1)
    rows = [int.from_bytes(packed[v].tobytes(), "little") for v in range(n)]
    g2 = Graph.from_bitsets(rows)
    relabel = {old: new for new, old in enumerate(new_order)}
    roots = sorted(range(pat.n), key=lambda w: w == F_NAMES.get("r", -1))
    for x in sorted(inst.x_set):
        for w in roots:
            if find_rooted_copy(g2, pat, w, relabel[x]) is not None:
                return False
    return True


def generalize_adversary(k: int):
    """(F_k, builder) for the higher-chromatic generalisation.

    F_4 is F itself; F_k adds numbered vertices 5..k adjacent to every
    vertex but r, and the instance builder partitions Z into k+1 parts.
    """
    if k < 4:
        raise ValueError("generalisation starts at k = 4")
    base = build_F()
    extra = k - 4
    n = 11 + extra
    edges = list(base.edges())
    r = F_NAMES["r"]
    for t in range(extra):
        v = 11 + t
        edges.extend((v, u) for u in range(11 + t) if u != r)
    f_k = Graph(n, edges)

    def builder(n_host: int, p: float, eps: float, seed: int, **kw) -> AdversaryInstance:
        return build_adversarial_instance(n_host, p, eps, seed, z_parts=k + 1, **kw)

    return f_k, builder


@dataclass(frozen=True)
class ClearingReport:
    deleted: dict = field(default_factory=dict)          # target -> edge deletions
    neighbour_loss: dict = field(default_factory=dict)   # target -> mean deleted fraction


def neighbourhood_clearing(
    gamma: Graph, g0: Graph, targets: set[int] | list[int]
) -> tuple[Graph, ClearingReport]:
    """Delete, for each target v, every g0-edge inside N_{g0}(v).

    Afterwards each target's neighbourhood induces an independent set;
    only edges with both ends in N_{g0}(v) are touched.  The report
    carries per-target deletion counts and the mean fraction of incident
    edges each neighbour of v lost (about p for G(n,p) hosts).
    """
    if not g0.is_subgraph_of(gamma):
        raise ValueError("g0 must be a subgraph of gamma")
    adj = [g0.neighbour_bits(v) for v in range(g0.n)]
    deleted: dict[int, int] = {}
    loss: dict[int, float] = {}
    for v in sorted(set(targets)):
        nb = g0.neighbour_bits(v)
        count = 0
        fracs = []
        for u in bits_of(nb):
            d0 = g0.degree(u)
            if d0:
                fracs.append((g0.neighbour_bits(u) & nb).bit_count() / d0)
            # Edges still alive inside N(v); removing as found keeps the
            # count exact (the second endpoint no longer sees them).
            for w in bits_of(adj[u] & nb):
                adj[u] &= ~(1 << w)
                adj[w] &= ~(1 << u)
                count += 1
        deleted[v] = count
        loss[v] = sum(fracs) / len(fracs) if fracs else 0.0
    return Graph.from_bitsets(adj), ClearingReport(deleted, loss)


__all__ = [
    "F_NAMES",
    "AssertionFailed",
    "RetriesExhausted",
    "AdversaryInstance",
    "FReport",
    "ClearingReport",
    "build_F",
    "analyze_F",
    "build_adversarial_instance",
    "verify_no_F_on_X",
    "generalize_adversary",
    "neighbourhood_clearing",
]
