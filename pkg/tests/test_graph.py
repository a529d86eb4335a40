"""graph-core: generation, degrees, cliques, common neighbourhoods, I/O."""

from __future__ import annotations

import math
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanlab.graph import (
    GnpParams,
    Graph,
    common_neighbourhood,
    count_cliques_in_neighbourhood,
    estimate_cliques_in_neighbourhood,
    generate_gnp,
    min_degree,
    read_edge_list,
    write_edge_list,
)


def complete_graph(n):
    return Graph(n, combinations(range(n), 2))


def test_gnp_p1_is_complete():
    g = generate_gnp(GnpParams(4, 1.0, 123))
    assert g.edge_count == 6
    assert all(g.has_edge(u, v) for u, v in combinations(range(4), 2))


def test_gnp_p0_is_edgeless():
    assert generate_gnp(GnpParams(100, 0.0, 9)).edge_count == 0


def test_gnp_edge_count_concentrates():
    # Independent oracle: binomial mean/variance for C(n,2) trials.
    mean = math.comb(1000, 2) * 0.1
    sd = math.sqrt(math.comb(1000, 2) * 0.1 * 0.9)
    g = generate_gnp(GnpParams(1000, 0.1, 7))
    assert abs(g.edge_count - mean) <= 3 * sd


def test_gnp_deterministic_per_seed():
    a = generate_gnp(GnpParams(300, 0.2, 42))
    b = generate_gnp(GnpParams(300, 0.2, 42))
    c = generate_gnp(GnpParams(300, 0.2, 43))
    assert [a.neighbour_bits(v) for v in range(300)] == [b.neighbour_bits(v) for v in range(300)]
    assert any(a.neighbour_bits(v) != c.neighbour_bits(v) for v in range(300))


@given(st.integers(2, 40), st.floats(0.0, 1.0), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_degree_sum_is_twice_edges(n, p, seed):
    g = generate_gnp(GnpParams(n, p, seed))
    assert sum(g.degree(v) for v in range(n)) == 2 * g.edge_count


def test_min_degree_basics():
    assert min_degree(complete_graph(4)) == 3
    assert min_degree(Graph(5)) == 0
    assert min_degree(Graph(0)) == 0


def test_min_degree_of_F():
    # Degree oracle from the construction: r and the cycle vertices have
    # degree 6, vertices 1..3 have 7, vertex 4 has 9.
    from spanlab.adversary import F_NAMES, build_F

    f = build_F()
    degs = {name: f.degree(v) for name, v in F_NAMES.items()}
    assert degs["r"] == 6
    assert all(degs[c] == 6 for c in "abcdef")
    assert degs["4"] == 9
    assert degs["1"] == degs["2"] == degs["3"] == 7
    assert min_degree(f) == 6


def test_clique_count_s1_is_degree():
    g = generate_gnp(GnpParams(30, 0.3, 5))
    for v in range(30):
        assert count_cliques_in_neighbourhood(g, v, 1) == g.degree(v)


def test_clique_count_k5():
    g = complete_graph(5)
    assert count_cliques_in_neighbourhood(g, 2, 3) == math.comb(4, 3)


def test_clique_count_rejects_bad_s():
    g = complete_graph(4)
    with pytest.raises(ValueError):
        count_cliques_in_neighbourhood(g, 0, 0)
    with pytest.raises(ValueError):
        count_cliques_in_neighbourhood(g, 0, 9)


def test_clique_count_matches_brute_force():
    # Oracle: enumerate subsets of N(v) directly.
    g = generate_gnp(GnpParams(14, 0.5, 11))
    for v in range(g.n):
        nbhd = list(g.neighbours(v))
        for s in (2, 3, 4):
            brute = sum(
                1
                for sub in combinations(nbhd, s)
                if all(g.has_edge(a, b) for a, b in combinations(sub, 2))
            )
            assert count_cliques_in_neighbourhood(g, v, s) == brute


def test_clique_count_s2_equals_induced_edges():
    g = generate_gnp(GnpParams(25, 0.4, 3))
    for v in range(g.n):
        nb = set(g.neighbours(v))
        edges = sum(1 for a, b in combinations(sorted(nb), 2) if g.has_edge(a, b))
        assert count_cliques_in_neighbourhood(g, v, 2) == edges


def test_clique_estimator_tracks_exact():
    g = generate_gnp(GnpParams(40, 0.5, 19))
    v = 0
    exact = count_cliques_in_neighbourhood(g, v, 3)
    est, err = estimate_cliques_in_neighbourhood(g, v, 3, samples=20000, seed=1)
    assert abs(est - exact) <= max(4 * err, 0.05 * exact + 1)


def test_common_neighbourhood_basics():
    g = complete_graph(4)
    assert common_neighbourhood(g, [0, 1]) == {2, 3}
    assert common_neighbourhood(Graph(6), [2]) == set()
    assert common_neighbourhood(g, []) == {0, 1, 2, 3}
    gg = generate_gnp(GnpParams(50, 0.4, 2))
    for v in range(10):
        assert common_neighbourhood(gg, [v]) == set(gg.neighbours(v))


def test_common_neighbourhood_concentration():
    n, p = 200, 0.3
    g = generate_gnp(GnpParams(n, p, 77))
    mean = n * p * p
    tol = 4 * math.sqrt(mean)
    sizes = [len(common_neighbourhood(g, [u, v])) for u, v in [(0, 1), (5, 9), (20, 40)]]
    for s in sizes:
        assert abs(s - mean) <= tol


def test_graph_rejects_self_loops_and_range():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 3)])


def test_parallel_edges_collapse():
    g = Graph(3, [(0, 1), (1, 0), (0, 1)])
    assert g.edge_count == 1


def test_edge_list_roundtrip(tmp_path):
    g = generate_gnp(GnpParams(40, 0.2, 4))
    path = tmp_path / "g.txt"
    write_edge_list(g, str(path))
    h = read_edge_list(str(path))
    assert h.n == g.n
    assert sorted(h.edges()) == sorted(g.edges())


def test_dimacs_read(tmp_path):
    path = tmp_path / "g.col"
    path.write_text("c comment\np edge 4 3\ne 1 2\ne 2 3\ne 3 4\n")
    g = read_edge_list(str(path))
    assert g.n == 4
    assert sorted(g.edges()) == [(0, 1), (1, 2), (2, 3)]
