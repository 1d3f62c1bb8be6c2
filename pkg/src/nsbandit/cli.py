"""Command-line entry point.

Four verbs:

  run           one environment cell, one algorithm, CSV + PNG outputs
  sweep         a grid of cells (builtin "paper-grid" preset, subsettable)
  theory        feasibility thresholds and boundary constants as JSON
  detect-bench  full-scale detector Monte-Carlo suite as JSON

Exit codes: 0 success, 1 configuration error (bad flags, bad keys, missing
files), 2 runtime failure. Dotted overrides (`a.b=value`) apply after the
config file; value syntax is JSON with bare strings allowed.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys

from .config import ALGOS, ConfigError, describe_keys, load_config, validate_config
from .harness import detector_benchmark, run_experiment, write_outputs
from .theory import min_test_thresholds, theory_summary

PAPER_GRID_T = (1000, 2000, 5000, 10_000, 20_000, 30_000, 40_000, 50_000,
                60_000, 70_000, 80_000, 90_000, 100_000)
PAPER_GRID_XI = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
PAPER_GRID_PROBLEMS = ("uniform", "worst")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems are config errors (exit 1)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="nsbandit",
        description="Non-stationary bandit experiments: restarting wrappers, "
                    "multi-scale scheduling, change detection, and the theory "
                    "behind when detection is impossible.",
        epilog="config keys (settable via file or key=value overrides):\n"
               + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="verb", required=True, metavar="verb")

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--trials", type=int, help="override run.trials")
        p.add_argument("--threads", type=int, help="override run.thread_count")
        p.add_argument("--seed", type=int, help="override run.master_seed")
        p.add_argument("--out", help="override run.output_dir")
        p.add_argument("overrides", nargs="*", metavar="key=value",
                       help="dotted config overrides, applied last")

    p_run = sub.add_parser("run", help="run one cell with one algorithm",
                           formatter_class=argparse.RawDescriptionHelpFormatter,
                           epilog="config keys:\n" + describe_keys())
    p_run.add_argument("--algo", choices=ALGOS + ("oracle", "fixed_worst"),
                       help="algorithm (default: config key 'algo')")
    common(p_run)

    p_sweep = sub.add_parser("sweep", help="run a grid of cells",
                             formatter_class=argparse.RawDescriptionHelpFormatter,
                             epilog="config keys:\n" + describe_keys())
    p_sweep.add_argument("--preset", choices=("paper-grid",), default="paper-grid",
                         help="grid preset (default: paper-grid)")
    p_sweep.add_argument("--algo", action="append", choices=ALGOS,
                         help="restrict to this algorithm (repeatable)")
    p_sweep.add_argument("--T", action="append", type=int, dest="horizons",
                         help="restrict to this horizon (repeatable)")
    p_sweep.add_argument("--xi", action="append", type=float,
                         help="restrict to this xi (repeatable)")
    p_sweep.add_argument("--problem", action="append",
                         choices=PAPER_GRID_PROBLEMS,
                         help="restrict to this problem (repeatable)")
    common(p_sweep)

    p_theory = sub.add_parser("theory", help="print feasibility report and "
                                             "boundary constants as JSON")
    p_theory.add_argument("--T", type=int, default=100_000, help="horizon (default 100000)")
    p_theory.add_argument("--delta", type=float, default=None,
                          help="confidence (default 1/T)")
    p_theory.add_argument("--rho", choices=("inv_sqrt", "mab"), default="inv_sqrt",
                          help="regret-rate form (default inv_sqrt)")
    p_theory.add_argument("--arms", type=int, default=1,
                          help="arm count (mab form only; default 1)")
    p_theory.add_argument("--thresholds-only", action="store_true",
                          help="skip the root-finding constants")

    p_bench = sub.add_parser("detect-bench", help="run the detector Monte-Carlo "
                                                  "suite (minutes at defaults)")
    p_bench.add_argument("--streams", type=int, default=1000,
                         help="stationary/shift streams (default 1000)")
    p_bench.add_argument("--n", type=int, default=10_000,
                         help="stationary stream length (default 10000)")
    p_bench.add_argument("--qcd-runs", type=int, default=500,
                         help="stationary bandit runs (default 500)")
    p_bench.add_argument("--qcd-horizon", type=int, default=10_000,
                         help="horizon of those runs (default 10000)")
    p_bench.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p_bench.add_argument("--quiet", action="store_true", help="suppress progress lines")
    return parser


def _load_with_flags(args) -> dict:
    flags = []
    if args.trials is not None:
        flags.append(f"run.trials={args.trials}")
    if args.threads is not None:
        flags.append(f"run.thread_count={args.threads}")
    if args.seed is not None:
        flags.append(f"run.master_seed={args.seed}")
    if args.out is not None:
        flags.append(f"run.output_dir={args.out}")
    return load_config(args.config, flags + list(args.overrides))


def _cmd_run(args) -> int:
    cfg = _load_with_flags(args)
    algo = args.algo or cfg["algo"]
    cfg["algo"] = algo
    validate_config(cfg)
    results = run_experiment(cfg, [algo], log=print)
    written = write_outputs(results, cfg["run"]["output_dir"], cfg)
    print(f"wrote {len(written)} files to {cfg['run']['output_dir']}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load_with_flags(args)
    horizons = args.horizons or list(PAPER_GRID_T)
    xis = args.xi or list(PAPER_GRID_XI)
    problems = args.problem or list(PAPER_GRID_PROBLEMS)
    algos = args.algo or list(cfg["algos"])
    for xi in xis:
        if not 0.0 < xi < 1.0:
            raise ConfigError(f"config key env.param: xi={xi} must lie in (0, 1)")
    results = []
    for T in sorted(set(horizons)):
        for problem in problems:
            for xi in sorted(set(xis)):
                cell = copy.deepcopy(cfg)
                cell["env"].update(T=T, problem=problem, cp_model="geometric", param=xi)
                validate_config(cell)
                results.extend(run_experiment(cell, algos, log=print))
    written = write_outputs(results, cfg["run"]["output_dir"], cfg)
    print(f"wrote {len(written)} files to {cfg['run']['output_dir']}")
    return 0


def _cmd_theory(args) -> int:
    if args.T < 2:
        raise ConfigError("config key env.T: must be >= 2")
    delta = 1.0 / args.T if args.delta is None else args.delta
    if not 0.0 < delta < 1.0:
        raise ConfigError("config key master.delta: must lie in (0, 1)")
    if args.thresholds_only:
        doc = min_test_thresholds(args.T, delta, args.rho, args.arms).to_dict()
    else:
        doc = theory_summary(args.T, delta, args.rho, args.arms)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def _cmd_bench(args) -> int:
    log = None if args.quiet else (lambda s: print(s, file=sys.stderr))
    doc = detector_benchmark(streams=args.streams, n=args.n, qcd_runs=args.qcd_runs,
                             qcd_horizon=args.qcd_horizon, seed=args.seed, log=log)
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0 if all(section["pass"] for section in doc.values()) else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "sweep":
            return _cmd_sweep(args)
        if args.verb == "theory":
            return _cmd_theory(args)
        return _cmd_bench(args)
    except SystemExit as e:  # --help and friends
        return int(e.code or 0)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
