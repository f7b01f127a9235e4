"""Command line entry point: ``nkcollab <subcommand> [options]``.

Every subcommand accepts ``--config FILE`` (a JSON object whose keys are the
long option names, with dashes or underscores); explicit flags override the
file, which overrides presets and built-in defaults. ``--verify`` runs the
relevant acceptance checks and exits with status 1 if any hard check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import verify as V
from .concern_network import dump_agents, write_edge_list as write_agent_edges
from .experiment import (
    PRESETS,
    SweepSpec,
    format_regressions,
    format_summary,
    network_summary,
    read_results,
    regression_table,
    run_sweep,
    summarize,
    write_results,
)
from .graph_metrics import (
    REPORT_COLUMNS,
    SamplingPlan,
    calibrate_sample_size,
    metrics_report,
    read_edge_list,
    write_report_csv,
    write_report_json,
)
from .project_metrics import (
    DEFAULT_GRADES,
    EfficiencyAccumulator,
    GradeScale,
    batch_efficiency,
    project_stats,
    read_transition_log,
    write_stats_csv,
)
from .simulation import TrialSpec, run_trial, spec_dict, write_trajectory_csv, write_trials_csv
from .strategies import STRATEGIES, StrategyConfig

SIM_DEFAULTS = dict(
    strategy="Best+I",
    n=250,
    k=7,
    rewire_p=0.0,
    iterations=300,
    seed=0,
    sample_size=3,
    tie_break="incumbent",
    local_objective="concern",
    rewire_home=False,
)

SWEEP_DEFAULTS = dict(
    n=250,
    k=7,
    iterations=300,
    trials=100,
    rewire_values=list(SweepSpec().rewire_values),
    strategies=list(STRATEGIES),
    master_seed=0,
    paired=False,
    sample_size=3,
    tie_break="incumbent",
    local_objective="concern",
    rewire_home=False,
    workers=1,
)

GRAPH_DEFAULTS = dict(per_stratum=10, cut_per_stratum=40, strata=12, seed=0, exact=False, min_cut=True)

PROJECT_DEFAULTS = dict(grades=list(DEFAULT_GRADES))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _names(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def load_config(path) -> dict:
    if path is None:
        return {}
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise SystemExit(f"config {path}: expected a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(args: argparse.Namespace, defaults: dict, preset: dict | None = None) -> dict:
    """Merge defaults < preset < config file < explicit flags."""
    cfg = dict(defaults)
    cfg.update(preset or {})
    from_file = load_config(getattr(args, "config", None))
    unknown = set(from_file) - set(defaults)
    if unknown:
        raise SystemExit(f"unknown config keys: {', '.join(sorted(unknown))}")
    cfg.update(from_file)
    for key in defaults:
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    return cfg


def _report(checks) -> int:
    for c in checks:
        print(c.line())
    return 1 if V.failed(checks) else 0


def _bool_flag(p, name, help_text):
    dest = name.replace("-", "_")
    p.add_argument(f"--{name}", dest=dest, action="store_true", default=None, help=help_text)
    p.add_argument(f"--no-{name}", dest=dest, action="store_false", help=argparse.SUPPRESS)


def _add_strategy_options(p):
    p.add_argument("--sample-size", type=int, help="neighbours sampled per social step (default 3)")
    p.add_argument("--tie-break", choices=("incumbent", "coin"), help="local-majority tie rule")
    p.add_argument("--local-objective", choices=("concern", "global"), help="score local steps on the concern or on all loci")
    _bool_flag(p, "rewire-home", "allow rewiring to replace an agent's home locus")


def cmd_simulate(args) -> int:
    c = resolve(args, SIM_DEFAULTS)
    cfg = StrategyConfig(c["strategy"], c["sample_size"], c["tie_break"], c["local_objective"])
    spec = TrialSpec(cfg, c["n"], c["k"], c["rewire_p"], c["iterations"], c["seed"], c["rewire_home"])
    res = run_trial(spec, keep_network=bool(args.edges or args.agents))
    row = res.row()
    print(json.dumps({"spec": spec_dict(spec), **{k: row[k] for k in row if k not in ("strategy", "n", "k", "rewire_p", "seed")}}, indent=2))
    if args.out:
        write_trials_csv([res], args.out)
    if args.trajectory:
        write_trajectory_csv(res, args.trajectory)
    if args.edges:
        write_agent_edges(res.network, args.edges)
    if args.agents:
        dump_agents(res.network, args.agents)
    if args.verify:
        again = run_trial(spec)
        same = (again.trajectory.tobytes() == res.trajectory.tobytes()) and again.row() == row
        checks = [
            V.Check(8, "determinism", same, "re-run trajectory identical" if same else "re-run differs"),
            V.Check(5, "convergence before last iteration", res.converged_at < spec.iterations, f"converged_at={res.converged_at}"),
        ]
        return _report(checks)
    return 0


def _sweep_spec(args) -> tuple[SweepSpec, dict]:
    preset = PRESETS[args.preset] if args.preset else None
    c = resolve(args, SWEEP_DEFAULTS, preset)
    spec = SweepSpec(
        rewire_values=tuple(c["rewire_values"]),
        trials=c["trials"],
        strategies=tuple(c["strategies"]),
        n=c["n"],
        k=c["k"],
        iterations=c["iterations"],
        master_seed=c["master_seed"],
        paired=c["paired"],
        neighbor_sample_size=c["sample_size"],
        tie_break=c["tie_break"],
        local_objective=c["local_objective"],
        rewire_home=c["rewire_home"],
    )
    return spec, c


def cmd_sweep(args) -> int:
    spec, c = _sweep_spec(args)
    print(f"sweep: {spec.n_trials} trials (n={spec.n}, k={spec.k}, {spec.trials} per cell)", file=sys.stderr)

    def progress(done, total):
        if args.progress and (done % 50 == 0 or done == total):
            print(f"  {done}/{total}", file=sys.stderr)

    rows = run_sweep(spec, checkpoint=args.checkpoint, workers=c["workers"], progress=progress)
    if args.out:
        write_results(rows, args.out)
    p0 = [r for r in rows if r["rewire_p"] == 0.0]
    if p0:
        print("rewire p = 0")
        print(format_summary(summarize(rows, rewire_p=0.0)))
    if len(spec.rewire_values) > 1:
        try:
            print()
            print(format_regressions(regression_table(rows)))
        except ValueError as err:
            print(f"regression skipped: {err}")
        ns = network_summary(rows)
        print(f"\nnetworks: {ns['n_networks']}, mean degree {ns['mean_degree']:.2f}, path length {ns['mean_path_length']:.4f}")
    if args.verify:
        if args.preset == "desk":
            return _report(V.desk_checks(rows, spec.iterations))
        return _report(V.sweep_checks(rows, spec.iterations))
    return 0


def cmd_graph_metrics(args) -> int:
    c = resolve(args, GRAPH_DEFAULTS)
    g = read_edge_list(args.edges)
    if args.calibrate:
        result = calibrate_sample_size(g, args.calibrate, seed=c["seed"])
        print(json.dumps(result, indent=2))
        return 0
    if c["exact"]:
        path_plan = cut_plan = None
    else:
        path_plan = SamplingPlan(c["per_stratum"], c["strata"], c["seed"])
        cut_plan = SamplingPlan(c["cut_per_stratum"], c["strata"], c["seed"])
    report = metrics_report(g, path_plan, cut_plan, with_min_cut=c["min_cut"])
    for col in REPORT_COLUMNS:
        v = report[col]
        print(f"{col:>20}: {'undefined' if v is None else v}")
    if args.out:
        (write_report_json if str(args.out).endswith(".json") else write_report_csv)(report, args.out)
    if args.verify:
        return _report([V.check_estimators(seed=c["seed"])])
    return 0


def cmd_project_metrics(args) -> int:
    c = resolve(args, PROJECT_DEFAULTS)
    scale = GradeScale(tuple(c["grades"]))
    log = read_transition_log(args.transitions, scale)
    rows = project_stats(log)
    print(f"{'project':<24} {'E_A':>10} {'E_B':>10} {'E_C':>10} {'P':>7} {'articles':>8}")
    fmt = lambda v: "-" if v is None else f"{v:.4g}"  # noqa: E731
    for r in rows:
        print(f"{r['project']:<24} {fmt(r['E_A']):>10} {fmt(r['E_B']):>10} {fmt(r['E_C']):>10} {r['P']:>7.3f} {r['n_articles']:>8}")
    if args.out:
        write_stats_csv(rows, args.out)
    if args.verify:
        acc = EfficiencyAccumulator(scale)
        for rec in log.records:
            acc.add(rec)
        worst = 0.0
        for r in rows:
            for g in ("A", "B", "C"):
                if r[f"E_{g}"] is None:
                    continue
                a, b = acc.efficiency(r["project"], g), batch_efficiency(log, r["project"], g)
                if a != b:
                    worst = max(worst, abs(a - b) / abs(b))
        stream = V.Check(7, "streaming vs batch efficiency", worst <= 1e-12, f"max relative difference {worst:.2e}")
        return _report([stream, V.check_axioms()])
    return 0


def cmd_regress(args) -> int:
    rows = read_results(args.results)
    table = regression_table(rows)
    print(format_regressions(table))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("strategy,outcome,slope,p_value,n\n")
            for r in table:
                fh.write(f"{r.strategy},{r.outcome},{r.slope!r},{r.p_value!r},{r.n}\n")
    if args.verify:
        return _report([V.check_degree_signs(rows)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nkcollab", description="Networked collaboration on NK landscapes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="JSON file of option values")
        p.add_argument("--verify", action="store_true", help="run acceptance checks; exit 1 on failure")
        p.add_argument("--out", help="output file")

    p = sub.add_parser("simulate", help="run one trial")
    common(p)
    p.add_argument("--strategy", choices=STRATEGIES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--rewire-p", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--seed", type=int)
    _add_strategy_options(p)
    p.add_argument("--trajectory", help="write per-iteration mean value CSV")
    p.add_argument("--edges", help="write the agent network as an edge list")
    p.add_argument("--agents", help="write agent concerns as JSON")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run the rewiring sweep")
    common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--rewire-values", type=_floats, help="comma separated")
    p.add_argument("--strategies", type=_names, help="comma separated")
    p.add_argument("--master-seed", type=int)
    _bool_flag(p, "paired", "share landscape, network and start state across strategies")
    _add_strategy_options(p)
    p.add_argument("--workers", type=int)
    p.add_argument("--checkpoint", help="CSV to append finished trials to and resume from")
    p.add_argument("--progress", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("graph-metrics", help="structural measures of a directed edge list")
    common(p)
    p.add_argument("edges")
    p.add_argument("--per-stratum", type=int, help="path-length sources per degree stratum")
    p.add_argument("--cut-per-stratum", type=int, help="min-cut pairs per degree stratum")
    p.add_argument("--strata", type=int)
    p.add_argument("--seed", type=int)
    _bool_flag(p, "exact", "compute all pairs instead of sampling")
    _bool_flag(p, "min-cut", "compute mean min-cut (default on; --no-min-cut to skip)")
    p.add_argument("--calibrate", choices=("path", "mincut"), help="print error vs sample size for one metric")
    p.set_defaults(func=cmd_graph_metrics)

    p = sub.add_parser("project-metrics", help="efficiency and performance from a transition CSV")
    common(p)
    p.add_argument("transitions")
    p.add_argument("--grades", type=_names, help="comma separated grade labels, lowest first")
    p.set_defaults(func=cmd_project_metrics)

    p = sub.add_parser("regress", help="standardized degree regressions from sweep results")
    common(p, config=False)
    p.add_argument("results")
    p.set_defaults(func=cmd_regress)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
