"""Seeded single trials: trajectory, convergence, performance and efficiency."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field

import numpy as np

from .concern_network import ConcernNetwork, concern_network
from .graph_metrics import DirectedGraph, path_length
from .landscape import NkModel, generate_model
from .strategies import Population, StrategyConfig

CONVERGENCE_FRACTION = 0.99

TRIAL_COLUMNS = (
    "strategy",
    "n",
    "k",
    "rewire_p",
    "seed",
    "mean_degree",
    "path_length",
    "performance",
    "efficiency",
    "converged_at",
)


@dataclass(frozen=True)
class TrialSpec:
    strategy: StrategyConfig
    n: int = 250
    k: int = 7
    rewire_p: float = 0.0
    iterations: int = 300
    seed: int = 0
    rewire_home: bool = False

    def __post_init__(self):
        if isinstance(self.strategy, str):
            object.__setattr__(self, "strategy", StrategyConfig(self.strategy))
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0.0 <= self.rewire_p <= 1.0:
            raise ValueError("rewire_p must lie in [0, 1]")


@dataclass
class TrialResult:
    spec: TrialSpec
    trajectory: np.ndarray
    performance: float
    efficiency: float
    converged_at: int
    mean_degree: float
    path_length: float
    network: ConcernNetwork | None = field(default=None, repr=False, compare=False)

    def row(self) -> dict:
        return {
            "strategy": self.spec.strategy.kind,
            "n": self.spec.n,
            "k": self.spec.k,
            "rewire_p": self.spec.rewire_p,
            "seed": self.spec.seed,
            "mean_degree": self.mean_degree,
            "path_length": self.path_length,
            "performance": self.performance,
            "efficiency": self.efficiency,
            "converged_at": self.converged_at,
        }


def convergence_step(trajectory) -> int:
    """First index whose value reaches 99% of the trajectory maximum."""
    v = np.asarray(trajectory, dtype=np.float64)
    if v.size == 0:
        raise ValueError("trajectory is empty")
    return int(np.argmax(v >= CONVERGENCE_FRACTION * v.max()))


def performance_of(trajectory) -> float:
    return float(np.asarray(trajectory, dtype=np.float64)[-1])


def efficiency_of(trajectory) -> float:
    """Reciprocal of the convergence step; an already-converged start counts as 1."""
    t = convergence_step(trajectory)
    return 1.0 if t == 0 else 1.0 / t


def trial_streams(seed: int):
    """Independent generators for the landscape, rewiring, initial state and dynamics."""
    model_ss, rewire_ss, dyn_ss = np.random.SeedSequence(seed).spawn(3)
    model_seed = int(model_ss.generate_state(1, np.uint64)[0])
    return model_seed, np.random.default_rng(rewire_ss), np.random.default_rng(dyn_ss)


def build_trial(spec: TrialSpec) -> tuple[NkModel, ConcernNetwork, np.random.Generator]:
    model_seed, rewire_rng, dyn_rng = trial_streams(spec.seed)
    model = generate_model(spec.n, spec.k, model_seed)
    net = concern_network(model, spec.rewire_p, rewire_rng, rewire_home=spec.rewire_home)
    return model, net, dyn_rng


def network_stats(net: ConcernNetwork) -> tuple[float, float]:
    g = DirectedGraph.from_csr(net.adj_ptr, net.adj_idx)
    try:
        pl = path_length(g).mean_path
    except ValueError:
        pl = float("nan")
    return net.mean_degree, pl


def run_trajectory(model: NkModel, net: ConcernNetwork, config: StrategyConfig, rng, iterations: int) -> np.ndarray:
    pop = Population(model, net, config, rng)
    traj = np.empty(iterations + 1, dtype=np.float64)
    traj[0] = pop.mean_value
    for t in range(1, iterations + 1):
        traj[t] = pop.step()
        if pop.fixed:
            traj[t:] = traj[t]
            break
    return traj


def run_trial(spec: TrialSpec, keep_network: bool = False) -> TrialResult:
    model, net, rng = build_trial(spec)
    traj = run_trajectory(model, net, spec.strategy, rng, spec.iterations)
    degree, pl = network_stats(net)
    return TrialResult(
        spec=spec,
        trajectory=traj,
        performance=performance_of(traj),
        efficiency=efficiency_of(traj),
        converged_at=convergence_step(traj),
        mean_degree=degree,
        path_length=pl,
        network=net if keep_network else None,
    )


def format_value(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_trials_csv(results, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRIAL_COLUMNS)
        for r in results:
            row = r.row() if isinstance(r, TrialResult) else r
            w.writerow([format_value(row[c]) for c in TRIAL_COLUMNS])


def write_trajectory_csv(result: TrialResult, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("iteration", "mean_value"))
        for t, v in enumerate(result.trajectory):
            w.writerow((t, repr(float(v))))


def spec_dict(spec: TrialSpec) -> dict:
    d = asdict(spec)
    d["strategy"] = spec.strategy.kind
    return d
