"""Rewiring sweeps, per-strategy summaries and standardized degree regressions."""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .simulation import TRIAL_COLUMNS, TrialSpec, format_value, run_trial
from .strategies import STRATEGIES, StrategyConfig

REWIRE_VALUES = (0.0, 0.167, 0.333, 0.5, 0.667, 0.833, 1.0)
SWEEP_COLUMNS = ("trial",) + TRIAL_COLUMNS
OUTCOMES = ("performance", "efficiency")


@dataclass(frozen=True)
class SweepSpec:
    rewire_values: tuple = REWIRE_VALUES
    trials: int = 100
    strategies: tuple = STRATEGIES
    n: int = 250
    k: int = 7
    iterations: int = 300
    master_seed: int = 0
    # same landscape, network and initial draw for every strategy in a cell
    paired: bool = False
    neighbor_sample_size: int = 3
    tie_break: str = "incumbent"
    local_objective: str = "concern"
    rewire_home: bool = False

    def __post_init__(self):
        object.__setattr__(self, "rewire_values", tuple(float(p) for p in self.rewire_values))
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.rewire_values or any(not 0.0 <= p <= 1.0 for p in self.rewire_values):
            raise ValueError("rewire values must lie in [0, 1]")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        for s in self.strategies:
            self.config(s)

    def config(self, strategy: str) -> StrategyConfig:
        return StrategyConfig(strategy, self.neighbor_sample_size, self.tie_break, self.local_objective)

    @property
    def n_trials(self) -> int:
        return len(self.strategies) * len(self.rewire_values) * self.trials

    def trial_seed(self, strategy: str, p_index: int, trial: int) -> int:
        key = (p_index, trial) if self.paired else (STRATEGIES.index(strategy), p_index, trial)
        ss = np.random.SeedSequence(self.master_seed, spawn_key=key)
        return int(ss.generate_state(1, np.uint64)[0])

    def cells(self):
        """``(key, TrialSpec)`` pairs in canonical order: strategy, rewire value, trial."""
        for s in self.strategies:
            cfg = self.config(s)
            for j, p in enumerate(self.rewire_values):
                for t in range(self.trials):
                    spec = TrialSpec(cfg, self.n, self.k, p, self.iterations, self.trial_seed(s, j, t), self.rewire_home)
                    yield (s, p, t), spec


PRESETS = {
    "desk": dict(trials=20, n=100, k=7),
    "paper": dict(trials=100, n=250, k=7, iterations=300),
}


def preset(name: str, **overrides) -> SweepSpec:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    return SweepSpec(**{**PRESETS[name], **overrides})


def _key(row) -> tuple:
    return (row["strategy"], float(row["rewire_p"]), int(row["trial"]))


_INT_COLS = {"n", "k", "seed", "converged_at", "trial"}
_STR_COLS = {"strategy"}


def _parse_row(raw: dict) -> dict:
    out = {}
    for c in SWEEP_COLUMNS:
        v = raw[c]
        out[c] = v if c in _STR_COLS else int(v) if c in _INT_COLS else float(v)
    return out


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [_parse_row(r) for r in csv.DictReader(fh)]


def write_results(rows, path) -> None:
    tmp = Path(f"{path}.tmp")
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([format_value(r[c]) for c in SWEEP_COLUMNS])
    os.replace(tmp, path)


def _run_one(item):
    (s, p, t), spec = item
    row = run_trial(spec).row()
    row["trial"] = t
    return row


def run_sweep(spec: SweepSpec, checkpoint=None, workers: int = 1, progress=None) -> list[dict]:
    """Run every trial of ``spec`` and return rows in canonical order.

    With ``checkpoint`` set, each finished trial is appended to that CSV as it
    completes and trials already present there are skipped, so an interrupted
    sweep resumes where it stopped. Rows from other specs are ignored only if
    their keys fall outside this spec; a seed mismatch raises.
    """
    todo = list(spec.cells())
    order = {key: i for i, (key, _) in enumerate(todo)}
    done: dict = {}
    if checkpoint is not None and Path(checkpoint).exists() and Path(checkpoint).stat().st_size:
        expected = {key: s.seed for key, s in todo}
        for row in read_results(checkpoint):
            key = _key(row)
            if key in expected:
                if row["seed"] != expected[key]:
                    raise ValueError(f"checkpoint {checkpoint} was written by a different sweep (seed mismatch at {key})")
                done[key] = row
    pending = [item for item in todo if item[0] not in done]

    fh = None
    writer = None
    if checkpoint is not None:
        fresh = not Path(checkpoint).exists() or Path(checkpoint).stat().st_size == 0
        fh = open(checkpoint, "a", newline="")
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(SWEEP_COLUMNS)
            fh.flush()

    def record(row):
        done[_key(row)] = row
        if writer is not None:
            writer.writerow([format_value(row[c]) for c in SWEEP_COLUMNS])
            fh.flush()
        if progress is not None:
            progress(len(done), len(todo))

    try:
        if workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(_run_one, pending, chunksize=4):
                    record(row)
        else:
            for item in pending:
                record(_run_one(item))
    finally:
        if fh is not None:
            fh.close()
    return sorted(done.values(), key=lambda r: order[_key(r)])


def filter_rows(rows, strategy=None, rewire_p=None) -> list[dict]:
    out = rows
    if strategy is not None:
        out = [r for r in out if r["strategy"] == strategy]
    if rewire_p is not None:
        out = [r for r in out if math.isclose(float(r["rewire_p"]), rewire_p, abs_tol=1e-9)]
    return list(out)


@dataclass(frozen=True)
class Summary:
    strategy: str
    n_trials: int
    performance: float
    performance_se: float | None
    efficiency: float
    efficiency_se: float | None


def _mean_se(values):
    v = np.sort(np.asarray(values, dtype=np.float64))
    mean = float(np.mean(v))
    se = None if v.size < 2 else float(np.std(v, ddof=1) / math.sqrt(v.size))
    return mean, se


def summarize(rows, rewire_p: float | None = 0.0, strategies=None) -> list[Summary]:
    """Mean and standard error of both outcomes per strategy.

    Values are sorted before reduction so the result does not depend on row order.
    """
    rows = filter_rows(rows, rewire_p=rewire_p)
    if not rows:
        raise ValueError("no results to summarize")
    if strategies is None:
        present = {r["strategy"] for r in rows}
        strategies = [s for s in STRATEGIES if s in present] + sorted(present - set(STRATEGIES))
    out = []
    for s in strategies:
        sel = [r for r in rows if r["strategy"] == s]
        if not sel:
            continue
        pm, pse = _mean_se([r["performance"] for r in sel])
        em, ese = _mean_se([r["efficiency"] for r in sel])
        out.append(Summary(s, len(sel), pm, pse, em, ese))
    return out


@dataclass(frozen=True)
class RegressionResult:
    strategy: str
    outcome: str
    slope: float
    p_value: float
    n: int

    @property
    def stars(self) -> str:
        return "***" if self.p_value < 0.001 else "**" if self.p_value < 0.01 else "*" if self.p_value < 0.05 else ""


def standardized_slope(x, y) -> tuple[float, float, int]:
    """OLS slope of z(y) on z(x) with its two-sided t-test p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = x.size
    if n != y.size:
        raise ValueError("x and y differ in length")
    if n < 3:
        raise ValueError("need at least 3 observations")
    sx, sy = x.std(ddof=1), y.std(ddof=1)
    if sx == 0 or sy == 0:
        raise ValueError("zero variance in regressor or outcome")
    zx = (x - x.mean()) / sx
    zy = (y - y.mean()) / sy
    slope = float(np.dot(zx, zy) / np.dot(zx, zx))
    slope = min(1.0, max(-1.0, slope))
    resid = 1.0 - slope * slope
    if resid <= 0.0:
        return slope, 0.0, n
    t = slope * math.sqrt((n - 2) / resid)
    p = float(2.0 * stats.t.sf(abs(t), n - 2))
    return slope, min(1.0, max(0.0, p)), n


def standardized_degree_regression(rows, strategy: str, outcome: str) -> RegressionResult:
    if outcome not in OUTCOMES:
        raise ValueError(f"outcome must be one of {OUTCOMES}")
    sel = sorted(filter_rows(rows, strategy=strategy), key=lambda r: (r["rewire_p"], r["trial"]))
    slope, p, n = standardized_slope([r["mean_degree"] for r in sel], [r[outcome] for r in sel])
    return RegressionResult(strategy, outcome, slope, p, n)


def regression_table(rows, strategies=None) -> list[RegressionResult]:
    present = {r["strategy"] for r in rows}
    strategies = strategies or [s for s in STRATEGIES if s in present]
    return [standardized_degree_regression(rows, s, o) for s in strategies for o in OUTCOMES]


def network_summary(rows) -> dict:
    """Grand means and coefficients of variation of network stats, one network per (rewire value, trial)."""
    nets = {}
    for r in rows:
        nets.setdefault((r["rewire_p"], r["trial"], r["seed"]), (r["mean_degree"], r["path_length"]))
    deg = np.array(sorted(v[0] for v in nets.values()))
    pl = np.array(sorted(v[1] for v in nets.values()))
    cv = lambda a: float(a.std(ddof=1) / a.mean()) if a.size > 1 else float("nan")
    return {
        "n_networks": len(nets),
        "mean_degree": float(deg.mean()),
        "sd_degree": float(deg.std(ddof=1)) if deg.size > 1 else float("nan"),
        "mean_path_length": float(pl.mean()),
        "cv_degree": cv(deg),
        "cv_path_length": cv(pl),
    }


def format_summary(summaries) -> str:
    def se(v):
        return "   n/a" if v is None else f"{v:.4f}"

    lines = [f"{'strategy':<9} {'trials':>6} {'performance':>12} {'se':>7} {'efficiency':>11} {'se':>7}"]
    for s in summaries:
        lines.append(
            f"{s.strategy:<9} {s.n_trials:>6} {s.performance:>12.4f} {se(s.performance_se):>7} "
            f"{s.efficiency:>11.4f} {se(s.efficiency_se):>7}"
        )
    return "\n".join(lines)


def format_regressions(results) -> str:
    lines = [f"{'strategy':<9} {'outcome':<12} {'slope':>8} {'p':>10} {'n':>5}"]
    for r in results:
        lines.append(f"{r.strategy:<9} {r.outcome:<12} {r.slope:>8.3f} {r.p_value:>10.3g} {r.n:>5} {r.stars}")
    return "\n".join(lines)
