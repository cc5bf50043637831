"""Command-line entry point: ``movnet <subcommand> [options]``.

Exit status: 0 success / consensus reached, 1 usage or configuration error,
2 a modelling assumption failed, 3 no consensus by ``t_max``.
"""

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import contraction_coefficient, empirical_drift, empirical_vs_ergodic, run_campaign
from .config import ExperimentConfig, _int, _matrix, _section, fixture, trial_seed
from .consensus import check_ergodic, run_trial
from .digraph import WeightedDigraph, cycle_gcd, is_strongly_connected, out_degrees, transition_matrix
from .exceptions import (
    AssumptionViolated,
    ConfigError,
    InsufficientSamples,
    MovnetError,
    TrialError,
)
from .markov import slem, stationary_distribution
from .neighborhood import ergodic_adjacency, ergodic_laplacian, snapshot_record

log = logging.getLogger("movnet")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_ASSUMPTION = 2
EXIT_NO_CONSENSUS = 3

TRACE_HEADER = ("t", "xi", "conservation_residual")


def _write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")
    return path


def _resolve_seed(args, config):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MOVNET_SEED")
    if env is not None:
        try:
            seed = int(env)
        except ValueError:
            raise ConfigError(f"MOVNET_SEED must be an integer, got {env!r}") from None
        if seed < 0:
            raise ConfigError("MOVNET_SEED must be non-negative")
        return seed
    return config.master_seed


def load_config(args):
    if args.fixture and args.config:
        raise ConfigError("use either --config or --fixture, not both")
    if args.fixture:
        config = fixture(args.fixture)
    elif args.config:
        config = ExperimentConfig.load(args.config)
    else:
        config = fixture("default")
    epsilon = getattr(args, "epsilon", None)
    force = config.force_epsilon or args.force_epsilon
    try:
        config = config.with_overrides(
            epsilon=epsilon,
            force_epsilon=force or None,
            trials=args.trials,
            t_max=args.t_max,
        )
    except MovnetError as exc:
        raise ConfigError(str(exc)) from exc
    seed = _resolve_seed(args, config)
    return config.with_overrides(master_seed=seed)


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from exc


def _load_for_analysis(args):
    """Full config when available; a bare ``graph`` section is accepted too."""
    if args.config and not args.fixture:
        doc = _read_json(args.config)
        if isinstance(doc, dict) and "linkage" not in doc:
            graph = _section(doc, "graph")
            m = _int(graph, "m", "graph.m")
            try:
                return None, WeightedDigraph(_matrix(graph, "weights", m, "graph.weights"))
            except ValueError as exc:
                raise ConfigError(str(exc), field="graph.weights") from exc
    config = load_config(args)
    return config, config.graph


def cmd_analyze_graph(args):
    config, g = _load_for_analysis(args)
    report = {"m": g.m, "weights": g.weights.tolist()}
    strong = is_strongly_connected(g)
    report["strongly_connected"] = strong
    status = EXIT_OK
    try:
        out_degrees(g)
    except MovnetError as exc:
        report["verdict"] = f"{exc}: Assumption 1 fails"
        status = EXIT_ASSUMPTION
    if status == EXIT_OK and not strong:
        report["verdict"] = "not strongly connected: Assumption 1 fails"
        status = EXIT_ASSUMPTION
    if status == EXIT_OK:
        period = cycle_gcd(g)
        report["cycle_gcd"] = period
        report["aperiodic"] = period == 1
        if period != 1:
            report["verdict"] = f"periodic (gcd {period}): Assumption 1 fails"
            status = EXIT_ASSUMPTION
        else:
            report["verdict"] = "strongly connected and aperiodic: Assumption 1 holds"
            Q = transition_matrix(g)
            pi = stationary_distribution(Q)
            report["stationary_distribution"] = pi.pi.tolist()
            report["stationary_residual"] = pi.residual
            report["slem"] = slem(Q)
            report["collision_probability"] = pi.collision_probability
            if config is not None:
                delta = config.linkage.delta
                report["delta"] = delta
                report["epsilon"] = config.epsilon
                report["epsilon_interval"] = [0.0, (1.0 / delta) if delta > 0 else None]
                if config.params().in_stable_range:
                    report["contraction_coefficient"] = contraction_coefficient(
                        pi, config.linkage, config.params()
                    )
    if config is not None:
        report["config"] = config.to_dict()
    _write_json(Path(args.out) / "analyze_graph.json", report)
    for key in (
        "verdict", "cycle_gcd", "stationary_distribution", "slem",
        "collision_probability", "delta", "epsilon_interval", "contraction_coefficient",
    ):
        if key in report:
            print(f"{key}: {report[key]}")
    return status


def _write_trace(path, trace):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for t, (xi, res) in enumerate(zip(trace.xi.tolist(), trace.conservation_residual.tolist())):
            writer.writerow((t, repr(xi), repr(res)))
    return path


def cmd_simulate(args):
    config = load_config(args)
    seed = trial_seed(config.master_seed, 0)
    x0, pos0 = config.initial_conditions(seed)
    out = Path(args.out)
    records = []
    callback = None
    if args.dump_snapshots:
        callback = lambda t, pos, s: records.append(snapshot_record(s, pos))  # noqa: E731
    with np.errstate(over="ignore", invalid="ignore"):
        trace = run_trial(
            config.graph,
            config.linkage,
            config.params(),
            x0,
            pos0,
            config.t_max,
            threshold=config.threshold,
            seed=seed,
            check=not config.skip_assumption_checks,
            callback=callback,
        )
    trace_path = _write_trace(out / "trace.csv", trace)
    if records:
        with open(out / "snapshots.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    doc = {
        "config": config.to_dict(),
        "master_seed": config.master_seed,
        "trial_seed": seed,
        "x0": x0.tolist(),
        "pos0": pos0.tolist(),
        "consensus_time": trace.consensus_time,
        "final_state": trace.final_state.tolist(),
        "final_xi": float(trace.xi[-1]),
        "max_conservation_residual": float(trace.conservation_residual.max()),
        "trace": trace_path.name,
    }
    if config.linkage.mode == "independent":
        doc["warning"] = "independent arc sampling: snapshots need not be balanced"
    _write_json(out / "simulate_summary.json", doc)
    print(f"trace: {trace_path}")
    print(f"consensus_time: {trace.consensus_time}")
    print(f"final_xi: {float(trace.xi[-1])!r}")
    return EXIT_OK if trace.reached else EXIT_NO_CONSENSUS


def cmd_monte_carlo(args):
    config = load_config(args)
    summary = run_campaign(config, jobs=args.jobs)
    out = Path(args.out)
    doc = {
        "config": config.to_dict(),
        "master_seed": config.master_seed,
        "seed_derivation": "trial i uses SeedSequence([master_seed, i]).generate_state(1, uint64)[0]",
        "summary": summary.to_dict(),
    }
    try:
        drift = empirical_drift(summary, t_min=args.drift_t_min)
        doc["drift"] = drift.to_dict()
    except InsufficientSamples as exc:
        drift = None
        doc["drift"] = {"error": str(exc)}
    samples_path = out / "drift_samples.csv"
    samples_path.parent.mkdir(parents=True, exist_ok=True)
    with open(samples_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("trial", "t", "xi_t", "xi_next"))
        for row in summary.drift_samples.tolist():
            writer.writerow((int(row[0]), int(row[1]), repr(row[2]), repr(row[3])))
    doc["drift_samples"] = samples_path.name
    if config.linkage.mode == "independent":
        doc["warning"] = "independent arc sampling: snapshots need not be balanced"
    path = _write_json(out / "summary.json", doc)
    print(f"summary: {path}")
    print(f"consensus_fraction: {summary.consensus_fraction}")
    print(f"decay_rate: {summary.decay_rate}")
    if drift is not None:
        print(
            f"drift: empirical {drift.empirical_drift_ratio:.6g} +/- {drift.standard_error:.2g}"
            f" vs coefficient {drift.asymptotic_coefficient:.6g}"
        )
    return EXIT_OK if summary.consensus_fraction >= args.min_fraction else EXIT_NO_CONSENSUS


def cmd_ergodic(args):
    config = load_config(args)
    g, spec = config.graph, config.linkage
    if not config.skip_assumption_checks:
        check_ergodic(g)
    pi = stationary_distribution(transition_matrix(g))
    EA = ergodic_adjacency(pi, spec)
    EL = ergodic_laplacian(pi, spec)
    doc = {
        "config": config.to_dict(),
        "master_seed": config.master_seed,
        "stationary_distribution": pi.pi.tolist(),
        "collision_probability": pi.collision_probability,
        "ergodic_adjacency": EA.tolist(),
        "ergodic_laplacian": EL.tolist(),
        "laplacian_row_sums": EL.sum(axis=1).tolist(),
    }
    if args.t_max is not None:
        burn_in = min(config.burn_in, config.t_max - 1)
        doc["empirical_vs_ergodic"] = {
            "t_max": config.t_max,
            "burn_in": burn_in,
            "deviation": empirical_vs_ergodic(
                g, spec, config.t_max, burn_in, seed=trial_seed(config.master_seed, 0), check=False
            ),
        }
    path = _write_json(Path(args.out) / "ergodic.json", doc)
    print(f"report: {path}")
    print(f"ergodic_laplacian:\n{np.array2string(EL, precision=6)}")
    if "empirical_vs_ergodic" in doc:
        print(f"deviation: {doc['empirical_vs_ergodic']['deviation']}")
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration (JSON)")
    common.add_argument("--fixture", help="built-in configuration: default or pair")
    common.add_argument("--seed", type=int, help="master seed (falls back to $MOVNET_SEED)")
    common.add_argument("--trials", type=int)
    common.add_argument("--t-max", dest="t_max", type=int)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", default="movnet-out", help="output directory")
    common.add_argument("--epsilon", type=float, help="override the protocol step size")
    common.add_argument(
        "--force-epsilon", action="store_true", help="allow epsilon outside (0, 1/Delta)"
    )
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="movnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"movnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze-graph", parents=[common], help="ergodicity and walk statistics")
    p.set_defaults(func=cmd_analyze_graph)
    p = sub.add_parser("simulate", parents=[common], help="run one trial and write its trace")
    p.add_argument("--dump-snapshots", action="store_true", help="also write snapshots.jsonl")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("monte-carlo", parents=[common], help="run a seeded campaign of trials")
    p.add_argument("--drift-t-min", type=int, default=50)
    p.add_argument("--min-fraction", type=float, default=0.99)
    p.set_defaults(func=cmd_monte_carlo)
    p = sub.add_parser("ergodic", parents=[common], help="ergodic-limit network matrices")
    p.set_defaults(func=cmd_ergodic)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AssumptionViolated as exc:
        print(f"assumption violated: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except TrialError as exc:
        if isinstance(exc.cause, AssumptionViolated):
            print(f"assumption violated: {exc}", file=sys.stderr)
            return EXIT_ASSUMPTION
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, MovnetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
