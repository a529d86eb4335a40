"""p-density and regular-pair testing with witness search.

The exhaustive tester enumerates one side's qualifying subsets and uses
an exchange argument on the other: for a fixed Y' the minimum p-density
over X' of a given size is attained by the vertices with fewest edges
into Y', so sorted-degree prefixes cover all candidate X' exactly.  The
randomized tester reuses the same exchange step on sampled and
degree-outlier-seeded subsets.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, e, log
from typing import Iterable, Literal, Sequence

from .graph import Graph, bits_of, mask_of
from .rng import CounterRng

EXHAUSTIVE_SIDE_CAP = 16
DEFAULT_TRIALS = 2000


class PartitionBudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class PairParams:
    """Regularity slack eps, density threshold d, reference probability p."""

    eps: float
    d: float
    p: float

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if not 0 <= self.d <= 1:
            raise ValueError("d must lie in [0, 1]")
        if not 0 < self.p <= 1:
            raise ValueError("p must lie in (0, 1]")


@dataclass(frozen=True)
class RegularityVerdict:
    kind: Literal["verified", "witness", "probably-regular"]
    witness: tuple[frozenset, frozenset] | None = None
    witness_density: float | None = None
    failing_vertex: int | None = None
    reason: str = ""
    trials: int = 0

    @property
    def is_witness(self) -> bool:
        return self.kind == "witness"


def p_density(g: Graph, p: float, X: Iterable[int], Y: Iterable[int]) -> float:
    """d_{G,p}(X,Y) = e(X,Y) / (p |X| |Y|) for disjoint nonempty X, Y."""
    xs, ys = set(X), set(Y)
    if not xs or not ys:
        raise ValueError("both sides must be nonempty")
    if xs & ys:
        raise ValueError("sides must be disjoint")
    if p <= 0:
        raise ValueError("p must be positive")
    y_mask = mask_of(ys)
    edges = sum((g.neighbour_bits(x) & y_mask).bit_count() for x in xs)
    return edges / (p * len(xs) * len(ys))


def _density_witness(g, pp, x_sub, y_sub) -> RegularityVerdict:
    dens = p_density(g, pp.p, x_sub, y_sub)
    assert dens < pp.d - pp.eps, "witness must recheck below d - eps"
    return RegularityVerdict(
        kind="witness",
        witness=(frozenset(x_sub), frozenset(y_sub)),
        witness_density=dens,
        reason="density",
    )


def _exchange_extreme(g, p, xs: Sequence[int], y_mask: int, min_x: int, want_max: bool):
    """Extreme p-density over X' of size >= min_x against a fixed Y'.

    For fixed Y' and fixed |X'| the extreme is attained by the vertices
    with fewest (respectively most) edges into Y', so sorted-degree
    prefixes are exact.  Returns (density, X' list) or (None, None).
    """
    y_size = y_mask.bit_count()
    if y_size == 0:
        return None, None
    pairs = sorted(
        (((g.neighbour_bits(x) & y_mask).bit_count(), x) for x in xs),
        reverse=want_max,
    )
    best, best_a = None, None
    acc = 0
    for a, (deg, _) in enumerate(pairs, start=1):
        acc += deg
        if a < min_x:
            continue
        dens = acc / (p * a * y_size)
        if best is None or (dens > best if want_max else dens < best):
            best, best_a = dens, a
    if best is None:
        return None, None
    return best, [x for _, x in pairs[:best_a]]


def _exchange_min(g, p, xs, y_mask, min_x):
    return _exchange_extreme(g, p, xs, y_mask, min_x, want_max=False)


def _exchange_max(g, p, xs, y_mask, min_x):
    return _exchange_extreme(g, p, xs, y_mask, min_x, want_max=True)


def _qualifying_size(side_size: int, eps: float) -> int:
    return max(1, ceil(eps * side_size))


def test_lower_regular(
    g: Graph,
    pp: PairParams,
    X: Iterable[int],
    Y: Iterable[int],
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> RegularityVerdict:
    """Lower-regularity verdict for the pair (X, Y).

    Exhaustive (verified / witness) when both sides have at most 16
    vertices; otherwise randomized witness search returning witness or
    probably-regular with the trial count.
    """
    xs, ys = sorted(set(X)), sorted(set(Y))
    if not xs or not ys or set(xs) & set(ys):
        raise ValueError("sides must be disjoint and nonempty")
    if len(xs) <= EXHAUSTIVE_SIDE_CAP and len(ys) <= EXHAUSTIVE_SIDE_CAP:
        return _exhaustive_lower(g, pp, xs, ys)
    return _randomized_lower(g, pp, xs, ys, trials, seed)


def _exhaustive_lower(g, pp, xs, ys) -> RegularityVerdict:
    min_x = _qualifying_size(len(xs), pp.eps)
    min_y = _qualifying_size(len(ys), pp.eps)
    threshold = pp.d - pp.eps
    for y_bits in range(1, 1 << len(ys)):
        if y_bits.bit_count() < min_y:
            continue
        y_sub = [ys[i] for i in bits_of(y_bits)]
        dens, x_sub = _exchange_min(g, pp.p, xs, mask_of(y_sub), min_x)
        if dens is not None and dens < threshold:
            return _density_witness(g, pp, x_sub, y_sub)
    return RegularityVerdict(kind="verified")


def _randomized_lower(g, pp, xs, ys, trials, seed) -> RegularityVerdict:
    min_x = _qualifying_size(len(xs), pp.eps)
    min_y = _qualifying_size(len(ys), pp.eps)
    threshold = pp.d - pp.eps
    rng = CounterRng(seed)
    x_mask_full = mask_of(xs)
    y_mask_full = mask_of(ys)

    def check_y_subset(y_sub):
        dens, x_sub = _exchange_min(g, pp.p, xs, mask_of(y_sub), min_x)
        if dens is not None and dens < threshold:
            return _density_witness(g, pp, x_sub, y_sub)
        return None

    def check_x_subset(x_sub):
        dens, y_sub = _exchange_min(g, pp.p, ys, mask_of(x_sub), min_y)
        if dens is not None and dens < threshold:
            return _density_witness(g, pp, x_sub, y_sub)
        return None

    # Density violations concentrate on degree outliers: sweep sorted-degree
    # prefixes of both sides first.
    y_by_deg = sorted(ys, key=lambda y: (g.neighbour_bits(y) & x_mask_full).bit_count())
    x_by_deg = sorted(xs, key=lambda x: (g.neighbour_bits(x) & y_mask_full).bit_count())
    used = 0
    step_y = max(1, (len(ys) - min_y) // 8 or 1)
    step_x = max(1, (len(xs) - min_x) // 8 or 1)
    for b in range(min_y, len(ys) + 1, step_y):
        used += 1
        found = check_y_subset(y_by_deg[:b])
        if found:
            return found
    for a in range(min_x, len(xs) + 1, step_x):
        used += 1
        found = check_x_subset(x_by_deg[:a])
        if found:
            return found

    while used < trials:
        used += 1
        if used % 2:
            b = min_y + rng.randrange(len(ys) - min_y + 1)
            found = check_y_subset(rng.sample(ys, b))
        else:
            a = min_x + rng.randrange(len(xs) - min_x + 1)
            found = check_x_subset(rng.sample(xs, a))
        if found:
            return found
    return RegularityVerdict(kind="probably-regular", trials=used)


def test_fully_regular(
    g: Graph,
    pp: PairParams,
    X: Iterable[int],
    Y: Iterable[int],
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> RegularityVerdict:
    """Fully-regular variant: additionally bounds densities above.

    Fully regular iff some d' >= d keeps every qualifying pair's density
    within eps of d'; equivalently max - min <= 2 eps and min >= d - eps
    over qualifying pairs.  Exhaustive below the side cap only.
    """
    xs, ys = sorted(set(X)), sorted(set(Y))
    if not xs or not ys or set(xs) & set(ys):
        raise ValueError("sides must be disjoint and nonempty")
    lower = test_lower_regular(g, pp, xs, ys, trials=trials, seed=seed)
    if lower.is_witness:
        return lower
    if len(xs) > EXHAUSTIVE_SIDE_CAP or len(ys) > EXHAUSTIVE_SIDE_CAP:
        return RegularityVerdict(kind="probably-regular", trials=lower.trials)
    min_x = _qualifying_size(len(xs), pp.eps)
    min_y = _qualifying_size(len(ys), pp.eps)
    lo = hi = None
    lo_pair = hi_pair = None
    for y_bits in range(1, 1 << len(ys)):
        if y_bits.bit_count() < min_y:
            continue
        y_sub = [ys[i] for i in bits_of(y_bits)]
        y_mask = mask_of(y_sub)
        dmin, x_min = _exchange_min(g, pp.p, xs, y_mask, min_x)
        dmax, x_max = _exchange_max(g, pp.p, xs, y_mask, min_x)
        if lo is None or dmin < lo:
            lo, lo_pair = dmin, (x_min, y_sub)
        if hi is None or dmax > hi:
            hi, hi_pair = dmax, (x_max, y_sub)
    if hi - lo > 2 * pp.eps:
        x_sub, y_sub = lo_pair if lo < pp.d else hi_pair
        return RegularityVerdict(
            kind="witness",
            witness=(frozenset(x_sub), frozenset(y_sub)),
            witness_density=p_density(g, pp.p, x_sub, y_sub),
            reason=f"density spread {hi - lo:.4f} > 2*eps",
        )
    return RegularityVerdict(kind="verified")


def test_super_regular(
    g: Graph,
    gamma_graph: Graph,
    pp: PairParams,
    X: Iterable[int],
    Y: Iterable[int],
    *,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> RegularityVerdict:
    """Lower-regular plus the per-vertex degree bound into the other side.

    Every x in X needs |N_G(x,Y)| >= (d - eps) max(p|Y|, deg_Gamma(x,Y)/2),
    symmetrically for y in Y; the first failing vertex is reported.
    """
    if not g.is_subgraph_of(gamma_graph):
        raise ValueError("g must be a subgraph of gamma on the same vertex set")
    xs, ys = sorted(set(X)), sorted(set(Y))
    base = test_lower_regular(g, pp, xs, ys, trials=trials, seed=seed)
    if base.is_witness:
        return base
    factor = pp.d - pp.eps
    for side, other in ((xs, ys), (ys, xs)):
        o_mask = mask_of(other)
        for v in side:
            need = factor * max(
                pp.p * len(other),
                (gamma_graph.neighbour_bits(v) & o_mask).bit_count() / 2,
            )
            if (g.neighbour_bits(v) & o_mask).bit_count() < need:
                return RegularityVerdict(kind="witness", failing_vertex=v, reason="degree")
    return base


def naive_lower_regular_oracle(g: Graph, pp: PairParams, X, Y):
    """Brute-force subset-pair enumeration; the independent test oracle.

    Returns a violating (X', Y') pair or None.  Exponential in both
    sides; keep them small.
    """
    from itertools import combinations

    xs, ys = sorted(set(X)), sorted(set(Y))
    min_x = _qualifying_size(len(xs), pp.eps)
    min_y = _qualifying_size(len(ys), pp.eps)
    for a in range(min_x, len(xs) + 1):
        for x_sub in combinations(xs, a):
            for b in range(min_y, len(ys) + 1):
                for y_sub in combinations(ys, b):
                    if p_density(g, pp.p, x_sub, y_sub) < pp.d - pp.eps:
                        return x_sub, y_sub
    return None


@dataclass
class RawPartition:
    """Output of the desk-scale regular-partition heuristic."""

    parts: list[frozenset]
    v0: frozenset
    pair_verdicts: dict
    witness_pair_fraction: float
    reduced_edges: set
    reduced_min_degree: int
    min_degree_bound: float  # (alpha - d - eps) * r
    rounds: int


def build_regular_partition(
    g: Graph,
    p: float,
    eps: float,
    d: float,
    r0: int,
    *,
    max_parts: int = 64,
    trials: int = 300,
    seed: int = 0,
    max_rounds: int = 6,
) -> RawPartition:
    """Iterative witness-driven refinement into an equipartition plus V0.

    Frieze-Kannan style: every pair with a found irregularity witness is
    split along the witness sets, atoms are re-chopped into equal chunks
    (remainders spill to V0), and the loop stops once the found-witness
    fraction drops to eps, no split makes progress, or budgets run out.
    """
    if r0 < 1:
        raise ValueError("r0 must be at least 1")
    n = g.n
    rng = CounterRng(seed)
    order = list(range(n))
    rng.shuffle(order)
    size = n // r0
    parts = [set(order[i * size:(i + 1) * size]) for i in range(r0)]
    v0 = set(order[r0 * size:])
    pp = PairParams(eps=eps, d=d, p=p)

    verdicts: dict = {}
    rounds = 0
    for rounds in range(1, max_rounds + 1):
        verdicts = {}
        witnesses = []
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                v = test_lower_regular(
                    g, pp, parts[i], parts[j], trials=trials, seed=rng.next_u64()
                )
                verdicts[(i, j)] = v
                if v.is_witness and v.witness is not None:
                    witnesses.append((i, j, v))
        frac = len(witnesses) / max(1, len(parts) * (len(parts) - 1) // 2)
        if frac <= eps:
            break
        split_of: dict[int, set] = {}
        for i, j, v in witnesses:
            wx, wy = v.witness
            split_of.setdefault(i, set()).update(wx & parts[i])
            split_of.setdefault(j, set()).update(wy & parts[j])
        atoms: list[set] = []
        progressed = False
        for i, part in enumerate(parts):
            marked = split_of.get(i, set()) & part
            if 0 < len(marked) < len(part):
                atoms.extend([set(marked), part - marked])
                progressed = True
            else:
                atoms.append(set(part))
        if not progressed:
            break
        if len(atoms) > max_parts:
            raise PartitionBudgetExceeded(
                f"refinement wants {len(atoms)} parts, cap is {max_parts}"
            )
        # Equipartition repair: chop atoms into equal chunks, spill remainders.
        chunk = min(len(a) for a in atoms)
        parts = []
        for a in atoms:
            items = sorted(a)
            rng.shuffle(items)
            for at in range(0, len(items) - chunk + 1, chunk):
                parts.append(set(items[at:at + chunk]))
            v0.update(items[len(items) - len(items) % chunk:])
        if len(parts) > max_parts:
            raise PartitionBudgetExceeded(
                f"chunking produced {len(parts)} parts, cap is {max_parts}"
            )
        if len(v0) > max(eps * n, len(parts)):
            raise PartitionBudgetExceeded(
                f"exceptional set grew to {len(v0)} > eps*n = {eps * n:.1f}"
            )

    reduced_edges = set()
    for (i, j), v in verdicts.items():
        if not v.is_witness and p_density(g, p, parts[i], parts[j]) >= d:
            reduced_edges.add((i, j))
    r = len(parts)
    deg = [0] * r
    for i, j in reduced_edges:
        deg[i] += 1
        deg[j] += 1
    alpha = (min(g.degree(v) for v in range(n)) / (p * n)) if n else 0.0
    frac = sum(1 for v in verdicts.values() if v.is_witness) / max(1, len(verdicts))
    return RawPartition(
        parts=[frozenset(q) for q in parts],
        v0=frozenset(v0),
        pair_verdicts=verdicts,
        witness_pair_fraction=frac,
        reduced_edges=reduced_edges,
        reduced_min_degree=min(deg) if deg else 0,
        min_degree_bound=(alpha - d - eps) * r,
        rounds=rounds,
    )


@dataclass(frozen=True)
class InheritanceReport:
    mode: str
    failing: int
    tested: int
    bound: float
    failing_vertices: tuple[int, ...]


def inheritance_experiment(
    g: Graph,
    gamma_graph: Graph,
    X: Iterable[int],
    Y: Iterable[int],
    pp: PairParams,
    mode: Literal["one-sided", "two-sided"],
    *,
    C: float = 10.0,
    trials: int = 200,
    seed: int = 0,
) -> InheritanceReport:
    """Empirical regularity-inheritance count over all host vertices z.

    For each z, tests (X cap N_Gamma(z), Y) -- both sides restricted in
    two-sided mode -- and counts found witnesses (or degenerate empty
    restrictions) against the budget C p^{-1} log(en/|X|), respectively
    C max(p^{-2}, p^{-1} log(en/|X|)).  A statistical check, not a proof.
    """
    xs, ys = set(X), set(Y)
    x_mask, y_mask = mask_of(xs), mask_of(ys)
    n = gamma_graph.n
    failing = []
    rng = CounterRng(seed)
    for z in range(n):
        zx = x_mask & gamma_graph.neighbour_bits(z)
        zy = y_mask & gamma_graph.neighbour_bits(z) if mode == "two-sided" else y_mask
        sub_x = list(bits_of(zx))
        sub_y = list(bits_of(zy))
        if not sub_x or not sub_y:
            failing.append(z)
            continue
        v = test_lower_regular(g, pp, sub_x, sub_y, trials=trials, seed=rng.next_u64())
        if v.is_witness:
            failing.append(z)
    log_term = log(max(e, e * n / max(1, len(xs))))
    if mode == "one-sided":
        bound = C * log_term / pp.p
    else:
        bound = C * max(1 / pp.p**2, log_term / pp.p)
    return InheritanceReport(
        mode=mode,
        failing=len(failing),
        tested=n,
        bound=bound,
        failing_vertices=tuple(failing),
    )


# Spec-mandated names start with test_; stop pytest collecting them as tests.
test_lower_regular.__test__ = False  # type: ignore[attr-defined]
test_fully_regular.__test__ = False  # type: ignore[attr-defined]
test_super_regular.__test__ = False  # type: ignore[attr-defined]

__all__ = [
    "PairParams",
    "RegularityVerdict",
    "RawPartition",
    "InheritanceReport",
    "PartitionBudgetExceeded",
    "EXHAUSTIVE_SIDE_CAP",
    "DEFAULT_TRIALS",
    "p_density",
    "test_lower_regular",
    "test_fully_regular",
    "test_super_regular",
    "naive_lower_regular_oracle",
    "build_regular_partition",
    "inheritance_experiment",
]
