"""Numba kernels and their numpy fallbacks must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from nkcollab.concern_network import concern_network
from nkcollab.kernels import _nb, _np
from nkcollab.landscape import generate_model
from nkcollab.verify import random_digraph


@pytest.fixture(scope="module")
def setup():
    m = generate_model(60, 5, 3)
    net = concern_network(m, 0.4, np.random.default_rng(3))
    ptr, locus, mask = m.dependents
    rng = np.random.default_rng(0)
    sols = rng.integers(0, 2, (net.n_agents, 60)).astype(np.uint8)
    return m, net, (m.payoff_tables, m.loci, ptr, locus, mask), sols


def test_fitness_and_indices(setup):
    m, _, deps, sols = setup
    np.testing.assert_array_equal(_nb.locus_indices(deps[0], deps[1], sols), _np.locus_indices(deps[0], deps[1], sols))
    a, b = _nb.fitness_batch(deps[0], deps[1], sols), _np.fitness_batch(deps[0], deps[1], sols)
    assert a.tobytes() == b.tobytes()


def test_flip_kernels(setup):
    m, net, deps, sols = setup
    np.testing.assert_array_equal(_nb.global_best_flips(*deps, sols), _np.global_best_flips(*deps, sols))
    agents = net.agents
    for member in (agents.member, np.ones_like(agents.member)):
        np.testing.assert_array_equal(
            _nb.local_best_flips(*deps, sols, agents.concerns, member),
            _np.local_best_flips(*deps, sols, agents.concerns, member),
        )
        np.testing.assert_array_equal(
            _nb.shared_local_flips(*deps, sols[0], agents.concerns, member),
            _np.shared_local_flips(*deps, sols[0], agents.concerns, member),
        )


@pytest.mark.parametrize("size", [1, 3, 7])
def test_social_kernels(setup, size):
    m, net, deps, sols = setup
    rng = np.random.default_rng(size)
    u = rng.random((net.n_agents, size + 1))
    fit = _nb.fitness_batch(deps[0], deps[1], sols)
    np.testing.assert_array_equal(
        _nb.best_neighbor_sources(net.adj_ptr, net.adj_idx, fit, fit, u, size),
        _np.best_neighbor_sources(net.adj_ptr, net.adj_idx, fit, fit, u, size),
    )
    # few distinct strings so plurality groups actually form
    coarse = sols[rng.integers(0, 4, net.n_agents)]
    np.testing.assert_array_equal(
        _nb.conformity_sources(net.adj_ptr, net.adj_idx, coarse, u, size),
        _np.conformity_sources(net.adj_ptr, net.adj_idx, coarse, u, size),
    )


def test_graph_kernels():
    rng = np.random.default_rng(1)
    for _ in range(5):
        g = random_digraph(70, 2.5, rng)
        src = np.arange(g.n_nodes, dtype=np.int64)
        for x, y in zip(_nb.bfs_distance_sums(g.out_ptr, g.out_idx, src), _np.bfs_distance_sums(g.out_ptr, g.out_idx, src)):
            np.testing.assert_array_equal(x, y)
        head, nxt, to, cap = g.arcs
        for _ in range(10):
            s, t = (int(v) for v in rng.choice(70, 2, replace=False))
            f1, r1 = _nb.unit_max_flow(70, head, nxt, to, cap, s, t)
            f2, r2 = _np.unit_max_flow(70, head, nxt, to, cap, s, t)
            assert f1 == f2


def test_zero_degree_rows():
    ptr = np.array([0, 0, 2], dtype=np.int64)
    idx = np.array([0, 0], dtype=np.int64)
    fit = np.array([0.9, 0.1])
    u = np.full((2, 4), 0.5)
    sols = np.zeros((2, 3), dtype=np.uint8)
    for mod in (_nb, _np):
        assert mod.best_neighbor_sources(ptr, idx, fit, fit, u, 3).tolist()[0] == -1
        assert mod.conformity_sources(ptr, idx, sols, u, 3).tolist()[0] == -1


SCRIPT = """
import sys
from nkcollab import BACKEND
from nkcollab.simulation import TrialSpec, run_trial
from nkcollab.graph_metrics import DirectedGraph, SamplingPlan, mean_min_cut, path_length
out = [BACKEND]
for kind in ("Best+I", "Conf+I", "Best+LI", "Conf+LI", "LMaj+LI"):
    r = run_trial(TrialSpec(kind, n=40, k=3, rewire_p=0.5, iterations=40, seed=5), keep_network=True)
    out.append(r.trajectory.tobytes().hex())
    out.append(repr(r.path_length))
g = DirectedGraph.from_csr(r.network.adj_ptr, r.network.adj_idx)
out.append(repr(mean_min_cut(g, SamplingPlan(5, seed=1)).mean_min_cut))
sys.stdout.write("\\n".join(out))
"""


def run_backend(name):
    env = {**os.environ, "NKCOLLAB_BACKEND": name}
    return subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True).stdout.split("\n")


@pytest.mark.slow
def test_end_to_end_trials_identical():
    nb, np_ = run_backend("numba"), run_backend("numpy")
    assert nb[0] == "numba" and np_[0] == "numpy"
    assert nb[1:] == np_[1:]


def test_disable_flag_selects_numpy():
    env = {**os.environ, "NKCOLLAB_DISABLE_NUMBA": "1"}
    out = subprocess.run([sys.executable, "-c", "import nkcollab; print(nkcollab.BACKEND)"], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == "numpy"
