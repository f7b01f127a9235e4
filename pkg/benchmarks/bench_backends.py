"""Time the numba kernels against their pure-numpy counterparts.

Kernel timings call both implementations directly in one process; the
end-to-end trial timing runs a subprocess per backend so that the
``NKCOLLAB_BACKEND`` switch is exercised as users would set it.

    python benchmarks/bench_backends.py --n 250 --repeats 5
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from nkcollab.concern_network import concern_network
from nkcollab.graph_metrics import DirectedGraph
from nkcollab.kernels import _nb, _np
from nkcollab.landscape import generate_model

TRIAL_SNIPPET = """
import json, sys, time
from nkcollab.simulation import TrialSpec, run_trial
spec = TrialSpec(sys.argv[1], n=int(sys.argv[2]), k=7, rewire_p=0.5, iterations=int(sys.argv[3]), seed=7)
run_trial(TrialSpec(sys.argv[1], n=20, k=2, iterations=2, seed=1))
t = time.perf_counter()
r = run_trial(spec)
print(json.dumps({"seconds": time.perf_counter() - t, "performance": r.performance}))
"""


def best_of(fn, repeats):
    fn()  # warm-up, includes JIT compilation for numba
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def kernel_cases(n, seed):
    rng = np.random.default_rng(seed)
    model = generate_model(n, 7, rng)
    net = concern_network(model, 0.5, rng)
    ptr, locus, mask = model.dependents
    deps = (model.payoff_tables, model.loci, ptr, locus, mask)
    sols = rng.integers(0, 2, size=(net.n_agents, n), dtype=np.uint8)
    fit = rng.random(net.n_agents)
    u = rng.random((net.n_agents, 4))
    member = net.agents.member
    g = DirectedGraph(net.adj_ptr, net.adj_idx)
    sources = np.arange(min(50, g.n_nodes), dtype=np.int64)
    head, nxt, to, cap = g.arcs
    return {
        "fitness_batch": lambda m: m.fitness_batch(model.payoff_tables, model.loci, sols),
        "global_best_flips": lambda m: m.global_best_flips(*deps, sols),
        "local_best_flips": lambda m: m.local_best_flips(*deps, sols, net.agents.concerns, member),
        "best_neighbor_sources": lambda m: m.best_neighbor_sources(net.adj_ptr, net.adj_idx, fit, fit, u, 3),
        "conformity_sources": lambda m: m.conformity_sources(net.adj_ptr, net.adj_idx, sols, u, 3),
        "bfs_distance_sums": lambda m: m.bfs_distance_sums(g.out_ptr, g.out_idx, sources),
        "unit_max_flow": lambda m: m.unit_max_flow(g.n_nodes, head, nxt, to, cap, 0, g.n_nodes - 1),
    }


def trial_time(backend, strategy, n, iterations):
    env = {**os.environ, "NKCOLLAB_BACKEND": backend}
    out = subprocess.run(
        [sys.executable, "-c", TRIAL_SNIPPET, strategy, str(n), str(iterations)],
        env=env, check=True, capture_output=True, text=True,
    )
    return json.loads(out.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=250)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--iterations", type=int, default=100)
    ap.add_argument("--strategies", nargs="+", default=["Best+I", "Best+LI", "LMaj+LI"])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'kernel':<22} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for name, call in kernel_cases(args.n, args.seed).items():
        a = best_of(lambda: call(_nb), args.repeats)
        b = best_of(lambda: call(_np), args.repeats)
        print(f"{name:<22} {a * 1e3:>10.3f} {b * 1e3:>10.3f} {b / a:>8.1f}")

    print()
    print(f"{'trial':<22} {'numba s':>10} {'numpy s':>10} {'speedup':>8}  same result")
    for s in args.strategies:
        a = trial_time("numba", s, args.n, args.iterations)
        b = trial_time("numpy", s, args.n, args.iterations)
        same = a["performance"] == b["performance"]
        print(f"{s:<22} {a['seconds']:>10.3f} {b['seconds']:>10.3f} {b['seconds'] / a['seconds']:>8.1f}  {same}")


if __name__ == "__main__":
    main()
