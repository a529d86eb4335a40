"""expcli: thinning, concentration checks, sweep harness, CLI."""

from __future__ import annotations

import csv
import json
import math

import pytest

from spanlab.experiments import (
    CSV_HEADER,
    ExperimentSpec,
    InfeasibleTarget,
    concentration_check,
    cycle_pattern,
    cycle_square_pattern,
    f_factor_pattern,
    hypergeometric_check,
    random_banded_graph,
    run_resilience_sweep,
    thin_to_min_degree,
)
from spanlab.graph import GnpParams, Graph, generate_gnp, min_degree
from itertools import combinations


def complete_graph(n):
    return Graph(n, combinations(range(n), 2))


def test_thin_keeps_target_degree():
    g = thin_to_min_degree(complete_graph(10), 0.5, 1.0, seed=3)
    degs = [g.degree(v) for v in range(10)]
    assert min(degs) >= 5
    assert max(degs) <= 9


def test_thin_noop_when_tight():
    g = complete_graph(6)
    out = thin_to_min_degree(g, 5 / 6, 1.0, seed=1)
    assert sorted(out.edges()) == sorted(g.edges())


def test_thin_infeasible():
    with pytest.raises(InfeasibleTarget):
        thin_to_min_degree(Graph(5, [(0, 1)]), 0.9, 1.0, seed=0)


def test_thin_random_graph():
    gamma = generate_gnp(GnpParams(500, 0.3, 4))
    g = thin_to_min_degree(gamma, 0.6, 0.3, seed=9)
    assert min_degree(g) >= 0.6 * 0.3 * 500
    assert g.is_subgraph_of(gamma)


def test_patterns():
    h, lab = cycle_pattern(10)
    assert h.edge_count == 10 and lab.bandwidth == 9
    h2, _ = cycle_square_pattern(10)
    assert h2.edge_count == 20
    hf, _, col = f_factor_pattern(3)
    assert hf.n == 33 and hf.edge_count == 108
    assert col.is_proper(hf)


def test_random_banded_graph_properties():
    h, lab, col = random_banded_graph(500, 3, 10, 3.0, seed=5)
    assert col.is_proper(h)
    assert lab.recompute_bandwidth(h) <= 10
    assert abs(sum(h.degree(v) for v in range(h.n)) / h.n - 3.0) < 0.2
    counts = [sum(1 for c in col.colour if c == j) for j in (1, 2, 3)]
    assert max(counts) - min(counts) <= 2


def test_concentration_zero_p():
    rep = concentration_check(50, 0.0, 20)
    assert rep.exceedances == 0 and rep.passed


def test_concentration_mid_p():
    rep = concentration_check(50, 0.5, 150, seed0=3)
    assert rep.passed
    assert rep.empirical_rate <= rep.chernoff_bound + 3 * math.sqrt(
        rep.chernoff_bound * (1 - rep.chernoff_bound) / rep.runs
    )


def test_hypergeometric_check():
    rep = hypergeometric_check(200, 50, 40, seeds=120, epsilon=0.5)
    assert rep.passed


def test_sweep_empty_grid(tmp_path):
    out = tmp_path / "sweep.csv"
    spec = ExperimentSpec(ns=(), out=str(out))
    records = run_resilience_sweep(spec)
    assert records == []
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows == [CSV_HEADER]


def test_sweep_hamilton_dirac(tmp_path):
    out = tmp_path / "ham.csv"
    spec = ExperimentSpec(
        ns=(40,), ps=(1.0,), patterns=("hamilton",), adversaries=("thin",),
        alphas=(0.55,), seeds=tuple(range(6)), out=str(out),
    )
    records = run_resilience_sweep(spec)
    assert len(records) == 6
    embedded = [r for r in records if r.outcome == "embedded"]
    assert len(embedded) >= 5
    with open(str(out) + ".certs.json") as fh:
        certs = json.load(fh)
    assert len(certs) == 6


def test_sweep_deterministic(tmp_path):
    spec = ExperimentSpec(
        ns=(30,), ps=(1.0,), patterns=("hamilton",), alphas=(0.6,),
        seeds=(0, 1), out=str(tmp_path / "a.csv"),
    )
    rec1 = run_resilience_sweep(spec)
    spec2 = ExperimentSpec(
        ns=(30,), ps=(1.0,), patterns=("hamilton",), alphas=(0.6,),
        seeds=(0, 1), out=str(tmp_path / "b.csv"),
    )
    rec2 = run_resilience_sweep(spec2)
    rows1 = [r.csv_row()[:-1] for r in rec1]  # wall time excluded
    rows2 = [r.csv_row()[:-1] for r in rec2]
    assert rows1 == rows2


def test_sweep_workers_match_serial(tmp_path):
    spec = ExperimentSpec(
        ns=(24,), ps=(1.0,), patterns=("hamilton",), alphas=(0.6,),
        seeds=(0, 1, 2),
    )
    serial = [r.csv_row()[:-1] for r in run_resilience_sweep(spec, workers=1)]
    parallel = [r.csv_row()[:-1] for r in run_resilience_sweep(spec, workers=2)]
    assert serial == parallel


def test_sweep_adversary_outcome():
    spec = ExperimentSpec(
        ns=(300,), ps=(0.3,), patterns=("hamilton",), adversaries=("s52",),
        alphas=(0.75,), seeds=(0,),
    )
    (rec,) = run_resilience_sweep(spec)
    assert rec.outcome == "adversary-certified-absent"
    assert rec.certificate["x_size"] >= 1


def test_sweep_captures_errors():
    # n not divisible by 11 for the f-factor pattern: recorded, not raised.
    spec = ExperimentSpec(
        ns=(40,), ps=(1.0,), patterns=("f-factor",), alphas=(0.8,), seeds=(0,),
    )
    (rec,) = run_resilience_sweep(spec)
    assert rec.outcome == "error"
    assert "error" in rec.certificate


def test_cli_gen_bandwidth_colour(tmp_path):
    from spanlab.cli import main

    gpath = tmp_path / "g.txt"
    assert main(["--out", str(gpath), "gen", "30", "0.4"]) == 0
    assert main([ "bandwidth", str(gpath)]) == 0
    assert main(["colour", str(gpath), "-k", "5"]) == 0


def test_cli_regcheck(tmp_path):
    from spanlab.cli import main
    from spanlab.graph import write_edge_list

    g = complete_graph(12)
    gpath = tmp_path / "g.txt"
    write_edge_list(g, str(gpath))
    xs = tmp_path / "x.txt"
    ys = tmp_path / "y.txt"
    xs.write_text(" ".join(str(v) for v in range(6)))
    ys.write_text(" ".join(str(v) for v in range(6, 12)))
    assert main(["regcheck", str(gpath), str(xs), str(ys), "--eps", "0.3", "-d", "0.5"]) == 0


def test_cli_adversary(tmp_path, capsys):
    from spanlab.cli import main

    code = main(["--seed", "2", "adversary", "-n", "300", "-p", "0.3", "--eps", "0.3"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["no_F_through_X"] is True
    assert payload["x_size"] == 1


def test_cli_embed_and_experiment(tmp_path):
    from spanlab.cli import main
    from spanlab.graph import write_edge_list

    g = thin_to_min_degree(complete_graph(30), 0.6, 1.0, seed=2)
    gpath = tmp_path / "g.txt"
    write_edge_list(g, str(gpath))
    out = tmp_path / "emb.csv"
    assert main(["--out", str(out), "embed", str(gpath)]) == 0
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["h_vertex", "g_vertex"]
    assert len(rows) == 31

    sweep = tmp_path / "sweep.csv"
    code = main([
        "--out", str(sweep), "experiment", "-n", "24", "--seeds", "3",
        "--alpha", "0.6",
    ])
    assert code == 0
    assert len(list(csv.reader(open(sweep)))) == 4
