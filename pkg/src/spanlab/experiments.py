"""Experiment orchestration: pattern builders, degree thinning, sweeps,
and concentration self-checks."""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from itertools import product
from math import comb, exp, sqrt

from .adversary import build_adversarial_instance, build_F, verify_no_F_on_X
from .embedder import Embedding, FailureCert, greedy_embed, verify_embedding
from .graph import Graph, GnpParams, generate_gnp, min_degree
from .labelling import Colouring, Labelling
from .rng import CounterRng, derive, stream_block


class InfeasibleTarget(Exception):
    pass


def thin_to_min_degree(gamma: Graph, alpha: float, p: float, seed: int) -> Graph:
    """Random adversary: delete edges in seeded random order while every
    degree stays at least alpha * p * n."""
    target = alpha * p * gamma.n
    if min_degree(gamma) < target:
        raise InfeasibleTarget(
            f"delta(gamma) = {min_degree(gamma)} below target {target:.1f}"
        )
    adj = [gamma.neighbour_bits(v) for v in range(gamma.n)]
    deg = [gamma.degree(v) for v in range(gamma.n)]
    edges = list(gamma.edges())
    rng = CounterRng(seed)
    rng.shuffle(edges)
    for u, v in edges:
        if deg[u] - 1 >= target and deg[v] - 1 >= target:
            adj[u] &= ~(1 << v)
            adj[v] &= ~(1 << u)
            deg[u] -= 1
            deg[v] -= 1
    return Graph.from_bitsets(adj)


# ---------------------------------------------------------------------------
# Target-graph builders.


def cycle_pattern(n: int) -> tuple[Graph, Labelling]:
    h = Graph(n, [(i, (i + 1) % n) for i in range(n)])
    return h, Labelling.identity(h)


def cycle_square_pattern(n: int) -> tuple[Graph, Labelling]:
    edges = [(i, (i + 1) % n) for i in range(n)] + [(i, (i + 2) % n) for i in range(n)]
    h = Graph(n, edges)
    return h, Labelling.identity(h)


def f_factor_pattern(copies: int) -> tuple[Graph, Labelling, Colouring]:
    """`copies` disjoint copies of the 11-vertex pattern F, canonically coloured."""
    f = build_F()
    base_col = [1, 2, 3, 4, 1, 2, 3, 1, 2, 3, 4]  # classes {1,a,d},{2,b,e},{3,c,f},{4,r}
    edges = []
    colour = []
    for c in range(copies):
        off = 11 * c
        edges.extend((u + off, v + off) for u, v in f.edges())
        colour.extend(base_col)
    h = Graph(11 * copies, edges)
    return h, Labelling.identity(h), Colouring(tuple(colour), 4)


def random_banded_graph(
    n: int, k: int, bandwidth: int, avg_degree: float, seed: int
) -> tuple[Graph, Labelling, Colouring]:
    """Random H with bandwidth <= `bandwidth` under the identity labelling.

    Colour classes are balanced by construction (position mod k staggered
    per window) and edges are sampled only between differently coloured
    vertices within the band, so the colouring is proper with classes of
    near-equal size -- the regime the block-scan assignment expects.
    """
    rng = CounterRng(seed)
    colour = [1 + (pos % k) for pos in range(n)]
    edges = []
    # Sample within-band pairs at a rate giving the requested mean degree.
    pairs = [
        (u, u + d) for d in range(1, bandwidth + 1) for u in range(n - d)
        if colour[u] != colour[u + d]
    ]
    want = int(avg_degree * n / 2)
    if want > len(pairs):
        raise ValueError("avg_degree unreachable within the band")
    chosen = rng.sample(pairs, want)
    h = Graph(n, chosen)
    return h, Labelling.identity(h), Colouring(tuple(colour), k)


# ---------------------------------------------------------------------------
# Concentration self-checks.


@dataclass(frozen=True)
class ConcentrationReport:
    n: int
    p: float
    runs: int
    epsilon: float
    exceedances: int
    empirical_rate: float
    chernoff_bound: float
    passed: bool


def concentration_check(
    n: int, p: float, seeds: int, *, epsilon: float = 0.1, seed0: int = 0
) -> ConcentrationReport:
    """Edge-count concentration of G(n,p) against the Chernoff budget.

    Counts runs with |edges - E| > epsilon * E and passes iff the
    empirical rate does not exceed 2 exp(-epsilon^2 E / 3) plus three
    standard errors of the estimator.
    """
    m = comb(n, 2)
    mean = m * p
    bound = min(1.0, 2 * exp(-(epsilon**2) * mean / 3)) if mean > 0 else 0.0
    exceed = 0
    threshold = int(p * 2**64)
    for run in range(seeds):
        s = derive(seed0, run)
        if p <= 0:
            edges = 0
        else:
            edges = 0
            at = 0
            while at < m:
                blk = min(1 << 20, m - at)
                vals = stream_block(s, at, blk)
                import numpy as np

                edges += int((vals < np.uint64(threshold)).sum()) if p < 1 else blk
                at += blk
        if mean > 0 and abs(edges - mean) > epsilon * mean:
            exceed += 1
    rate = exceed / seeds if seeds else 0.0
    stderr = sqrt(bound * (1 - bound) / seeds) if seeds else 0.0
    return ConcentrationReport(
        n=n, p=p, runs=seeds, epsilon=epsilon, exceedances=exceed,
        empirical_rate=rate, chernoff_bound=bound,
        passed=rate <= bound + 3 * stderr,
    )


@dataclass(frozen=True)
class HypergeometricReport:
    population: int
    marked: int
    draws: int
    runs: int
    t: float
    exceedances: int
    bound: float
    passed: bool


def hypergeometric_check(
    population: int, marked: int, draws: int, seeds: int, *, epsilon: float = 0.5, seed0: int = 0
) -> HypergeometricReport:
    """Concentration of |sample cap marked| when drawing without replacement."""
    mean = marked * draws / population
    t = max(epsilon * mean, 1.0)
    bound = min(1.0, 2 * exp(-(epsilon**2) * t / 3))
    exceed = 0
    for run in range(seeds):
        rng = CounterRng(derive(seed0, 7, run))
        sample = rng.sample(range(population), draws)
        hits = sum(1 for v in sample if v < marked)
        if abs(hits - mean) > t:
            exceed += 1
    rate = exceed / seeds if seeds else 0.0
    stderr = sqrt(bound * (1 - bound) / seeds) if seeds else 0.0
    return HypergeometricReport(
        population=population, marked=marked, draws=draws, runs=seeds,
        t=t, exceedances=exceed, bound=bound,
        passed=rate <= bound + 3 * stderr,
    )


# ---------------------------------------------------------------------------
# Resilience sweep.

CSV_HEADER = [
    "run_id", "n", "p", "k", "s", "pattern", "adversary", "alpha", "seed",
    "outcome", "backtracks", "v0_size", "min_restriction", "wall_time",
]


@dataclass(frozen=True)
class ExperimentSpec:
    """Grid over (n, p, pattern, adversary, alpha, seeds) with budgets."""

    ns: tuple = (60,)
    ps: tuple = (1.0,)
    ks: tuple = (2,)
    ss: tuple = (1,)
    patterns: tuple = ("hamilton",)
    adversaries: tuple = ("thin",)
    alphas: tuple = (0.55,)
    seeds: tuple = (0,)
    backtrack_budget: int = 100_000
    out: str | None = None

    def __post_init__(self):
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if any(not 0 < p <= 1 for p in self.ps):
            raise ValueError("p out of range")
        if any(not 0 < a <= 1 for a in self.alphas):
            raise ValueError("alpha out of range")

    def grid(self):
        return list(
            product(self.ns, self.ps, self.ks, self.ss, self.patterns,
                    self.adversaries, self.alphas, self.seeds)
        )


@dataclass
class RunRecord:
    run_id: int
    n: int
    p: float
    k: int
    s: int
    pattern: str
    adversary: str
    alpha: float
    seed: int
    outcome: str
    backtracks: int = 0
    v0_size: int = 0
    min_restriction: int = -1
    wall_time: float = 0.0
    certificate: dict = field(default_factory=dict)

    def csv_row(self):
        return [
            self.run_id, self.n, self.p, self.k, self.s, self.pattern,
            self.adversary, self.alpha, self.seed, self.outcome,
            self.backtracks, self.v0_size, self.min_restriction,
            f"{self.wall_time:.3f}",
        ]


def _build_pattern(name: str, n: int):
    if name == "hamilton":
        h, lab = cycle_pattern(n)
    elif name == "hamilton-square":
        h, lab = cycle_square_pattern(n)
    elif name == "f-factor":
        if n % 11:
            raise ValueError("f-factor needs n divisible by 11")
        h, lab, _ = f_factor_pattern(n // 11)
    else:
        raise ValueError(f"unknown pattern {name!r}")
    return h, lab


def _run_one(run_id: int, coords, budget: int) -> RunRecord:
    n, p, k, s, pattern, adversary, alpha, seed = coords
    rec = RunRecord(run_id, n, p, k, s, pattern, adversary, alpha, seed, outcome="error")
    t0 = time.time()
    try:
        gamma = generate_gnp(GnpParams(n, p, derive(seed, run_id, 1)))
        if adversary == "s52":
            inst = build_adversarial_instance(n, p, 0.3, derive(seed, run_id, 2))
            ok = verify_no_F_on_X(inst)
            rec.outcome = "adversary-certified-absent" if ok else "adversary-copy-found"
            rec.certificate = {
                "x_size": len(inst.x_set),
                "min_degree": min_degree(inst.g),
            }
        else:
            g = thin_to_min_degree(gamma, alpha, p, derive(seed, run_id, 3))
            h, lab = _build_pattern(pattern, n)
            result = greedy_embed(
                h, g, lab, backtrack_budget=budget, seed=derive(seed, run_id, 4)
            )
            if isinstance(result, FailureCert):
                rec.outcome = "failed"
                rec.backtracks = result.backtracks
                rec.certificate = result.to_json()
            else:
                assert verify_embedding(h, g, result, require_total=True)
                rec.outcome = "embedded"
                rec.certificate = {"map_size": len(result.map)}
    except Exception as exc:  # per-run errors never abort the sweep
        rec.outcome = "error"
        rec.certificate = {"error": f"{type(exc).__name__}: {exc}"}
    rec.wall_time = time.time() - t0
    return rec


def run_resilience_sweep(spec: ExperimentSpec, workers: int = 1) -> list[RunRecord]:
    """One record per grid point; CSV (plus a JSON certificate sidecar)
    written when spec.out is set.  Deterministic given the seeds; the
    wall_time column is excluded from determinism guarantees."""
    points = spec.grid()
    if workers > 1 and len(points) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(_run_one, range(len(points)), points,
                         [spec.backtrack_budget] * len(points))
            )
    else:
        records = [
            _run_one(i, coords, spec.backtrack_budget)
            for i, coords in enumerate(points)
        ]
    records.sort(key=lambda r: r.run_id)
    if spec.out:
        with open(spec.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for rec in records:
                writer.writerow(rec.csv_row())
        with open(spec.out + ".certs.json", "w") as fh:
            json.dump({rec.run_id: rec.certificate for rec in records}, fh, indent=2)
    return records


__all__ = [
    "InfeasibleTarget",
    "ExperimentSpec",
    "RunRecord",
    "ConcentrationReport",
    "HypergeometricReport",
    "CSV_HEADER",
    "thin_to_min_degree",
    "cycle_pattern",
    "cycle_square_pattern",
    "f_factor_pattern",
    "random_banded_graph",
    "concentration_check",
    "hypergeometric_check",
    "run_resilience_sweep",
]
