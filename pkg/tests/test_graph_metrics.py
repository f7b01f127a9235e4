import math

import networkx as nx
import numpy as np
import pytest

from nkcollab.concern_network import concern_network
from nkcollab.graph_metrics import (
    DirectedGraph,
    SamplingPlan,
    UndefinedMetricError,
    calibrate_sample_size,
    degree_skewness,
    degree_strata,
    max_flow,
    mean_degree,
    mean_min_cut,
    metrics_report,
    min_cut,
    path_length,
    read_edge_list,
    reachable,
    stratified_nodes,
    write_edge_list,
    write_report_csv,
    write_report_json,
)
from nkcollab.landscape import generate_model
from nkcollab.verify import duality_failures, edmonds_karp, estimator_errors, random_digraph


def cycle(n):
    return DirectedGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def to_nx(g):
    h = nx.DiGraph()
    h.add_nodes_from(range(g.n_nodes))
    h.add_edges_from(g.edges().tolist())
    return h


def textbook_skewness(x):
    x = np.asarray(x, dtype=float)
    n = len(x)
    mean = sum(x) / n
    m2 = sum((v - mean) ** 2 for v in x) / n
    m3 = sum((v - mean) ** 3 for v in x) / n
    g1 = m3 / m2 ** 1.5
    return math.sqrt(n * (n - 1)) / (n - 2) * g1


def test_three_cycle():
    g = cycle(3)
    assert mean_degree(g) == 1.0
    ps = path_length(g)
    assert ps.mean_path == 1.5 and ps.connected_fraction == 1.0
    assert mean_min_cut(g).mean_min_cut == 1.0


def test_complete_graph_degree():
    m = 6
    g = DirectedGraph.from_edges(m, [(a, b) for a in range(m) for b in range(m) if a != b])
    assert mean_degree(g) == m - 1


def test_handshake(rng):
    for _ in range(10):
        g = random_digraph(80, 3.0, rng)
        assert g.in_degree.mean() == g.out_degree.mean() == mean_degree(g)


def test_two_isolated_nodes():
    g = DirectedGraph.from_edges(2, [])
    with pytest.raises(UndefinedMetricError) as err:
        path_length(g)
    assert err.value.connected_fraction == 0.0
    with pytest.raises(UndefinedMetricError):
        mean_min_cut(g)


def test_empty_graph_errors():
    with pytest.raises(UndefinedMetricError):
        mean_degree(DirectedGraph.from_edges(0, []))


def test_self_loops_and_duplicates_dropped():
    g = DirectedGraph.from_edges(3, [(0, 0), (0, 1), (0, 1), (1, 2)])
    assert g.n_edges == 2


def test_skewness_symmetric_and_star():
    # cycle has zero variance: signalled, not NaN
    with pytest.raises(UndefinedMetricError):
        degree_skewness(cycle(7), "out")
    # out-degrees 0,1,2,3,4 in equal numbers: symmetric
    edges = []
    for node, d in enumerate([0, 1, 2, 3, 4] * 2):
        edges += [(node, (node + j + 1) % 10) for j in range(d)]
    g = DirectedGraph.from_edges(10, edges)
    assert abs(degree_skewness(g, "out")) < 1e-12
    star = DirectedGraph.from_edges(21, [(0, i) for i in range(1, 21)])
    assert degree_skewness(star, "out") > 4


def test_skewness_formula_oracle(rng):
    for _ in range(100):
        g = random_digraph(int(rng.integers(5, 60)), rng.uniform(1, 4), rng)
        for direction, deg in (("in", g.in_degree), ("out", g.out_degree)):
            if deg.std() == 0:
                continue
            assert degree_skewness(g, direction) == pytest.approx(textbook_skewness(deg), rel=1e-9, abs=1e-12)


def test_path_length_against_networkx(rng):
    for _ in range(10):
        g = random_digraph(int(rng.integers(10, 120)), rng.uniform(1, 4), rng)
        h = to_nx(g)
        dist = [d for s, row in nx.all_pairs_shortest_path_length(h) for t, d in row.items() if s != t]
        ps = path_length(g)
        assert ps.mean_path == pytest.approx(np.mean(dist), rel=1e-12)
        assert ps.connected_fraction == pytest.approx(len(dist) / (g.n_nodes * (g.n_nodes - 1)), rel=1e-12)


def test_strata_equal_counts(rng):
    g = random_digraph(100, 3.0, rng)
    parts = degree_strata(g, 12)
    sizes = [len(p) for p in parts]
    assert max(sizes) - min(sizes) <= 1 and sum(sizes) == 100
    total = g.in_degree + g.out_degree
    for a, b in zip(parts, parts[1:]):
        assert total[a].max() <= total[b].min()
    nodes, weights, which = stratified_nodes(g, SamplingPlan(3, seed=1), rng)
    assert np.bincount(which).tolist() == [3] * 12
    assert weights.sum() == pytest.approx(100)


def test_repeated_draws_are_balanced(rng):
    g = random_digraph(24, 2.0, rng)
    nodes, weights, which = stratified_nodes(g, SamplingPlan(5, strata=12), rng, repeats=True)
    assert np.bincount(which).tolist() == [5] * 12
    counts = np.bincount(nodes, minlength=24)
    assert counts.min() >= 2 and counts.max() <= 3


def test_menger_two_paths():
    g = DirectedGraph.from_edges(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
    assert max_flow(g, 0, 3)[0] == 2
    size, side = min_cut(g, 0, 3)
    assert size == 2 and side[0] and not side[3]


def test_duality_and_independent_oracle():
    assert duality_failures(n_graphs=20, max_nodes=50, pairs=10, seed=3) == []


def test_max_flow_against_networkx(rng):
    for _ in range(20):
        n = int(rng.integers(5, 50))
        g = random_digraph(n, rng.uniform(1.5, 5), rng)
        h = to_nx(g)
        nx.set_edge_attributes(h, 1, "capacity")
        for _ in range(5):
            s, t = (int(x) for x in rng.choice(n, 2, replace=False))
            assert max_flow(g, s, t)[0] == nx.maximum_flow_value(h, s, t)
            assert edmonds_karp(n, g.edges(), s, t) == nx.maximum_flow_value(h, s, t)


def test_reachable_matches_networkx(rng):
    g = random_digraph(60, 1.5, rng)
    h = to_nx(g)
    for s in range(0, 60, 7):
        want = np.zeros(60, dtype=bool)
        want[list(nx.descendants(h, s)) + [s]] = True
        np.testing.assert_array_equal(reachable(g, s), want)


def test_exact_min_cut_brute_force(rng):
    g = random_digraph(25, 2.5, rng)
    h = to_nx(g)
    nx.set_edge_attributes(h, 1, "capacity")
    vals = [nx.maximum_flow_value(h, s, t) for s in range(25) for t in range(25) if s != t and nx.has_path(h, s, t)]
    assert mean_min_cut(g).mean_min_cut == pytest.approx(np.mean(vals), rel=1e-12)


@pytest.mark.slow
def test_sampled_estimators_within_ten_percent():
    path_err, cut_err = estimator_errors(n_graphs=20, seed=11)
    assert path_err.max() < 0.10
    assert cut_err.max() < 0.10


@pytest.mark.slow
def test_estimators_unbiased():
    g = random_digraph(120, 4.0, np.random.default_rng(5))
    for fn, exact in [
        (lambda p: path_length(g, p).mean_path, path_length(g).mean_path),
        (lambda p: mean_min_cut(g, p).mean_min_cut, mean_min_cut(g).mean_min_cut),
    ]:
        est = np.array([fn(SamplingPlan(4, seed=s)) for s in range(100)])
        se = est.std(ddof=1) / 10
        assert abs(est.mean() - exact) < 2 * se


def test_min_cut_tracks_degree_on_concern_networks():
    degrees, cuts = [], []
    for seed in range(6):
        for p in (0.0, 0.5, 1.0):
            net = concern_network(generate_model(40, int(2 + seed % 3), seed), p, np.random.default_rng(seed))
            g = DirectedGraph.from_csr(net.adj_ptr, net.adj_idx)
            degrees.append(net.mean_degree)
            cuts.append(mean_min_cut(g, SamplingPlan(10, seed=seed)).mean_min_cut)
    assert np.corrcoef(degrees, cuts)[0, 1] > 0.9


def test_sampling_diagnostics():
    # two disconnected triangles: half the sinks are unreachable
    g = DirectedGraph.from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)])
    st = mean_min_cut(g, SamplingPlan(4, strata=2, seed=0))
    assert st.mean_min_cut == 1.0
    assert st.resampled + st.dropped > 0


def test_edge_list_io(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("# comment\nalice,bob\nbob carol\ncarol alice\nalice alice\n")
    g = read_edge_list(path)
    assert g.n_nodes == 3 and g.n_edges == 3
    assert set(g.labels) == {"alice", "bob", "carol"}
    write_edge_list(g, tmp_path / "out.txt")
    assert read_edge_list(tmp_path / "out.txt").n_edges == 3


def test_report_and_calibration(tmp_path, rng):
    g = random_digraph(60, 3.0, rng)
    rep = metrics_report(g, SamplingPlan(3, seed=0), SamplingPlan(10, seed=0))
    assert rep["nodes"] == 60 and rep["mean_degree"] == mean_degree(g)
    write_report_csv(rep, tmp_path / "r.csv")
    write_report_json(rep, tmp_path / "r.json")
    cal = calibrate_sample_size(g, "path", sizes=(1, 4), repeats=5)
    assert cal["curve"][0]["per_stratum"] == 1 and cal["exact"] > 0


def test_metrics_deterministic(rng):
    g = random_digraph(80, 3.0, rng)
    a = metrics_report(g, SamplingPlan(3, seed=4), SamplingPlan(8, seed=4))
    b = metrics_report(g, SamplingPlan(3, seed=4), SamplingPlan(8, seed=4))
    assert a == b
