"""``photon-chain-lab`` command line.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 acceptance failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .experiments import ExperimentError, emit_results, run_experiment
from .noise import worker_count

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 1, 2, 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photon-chain-lab",
                                     description="State-transfer experiments on coupled-mode chains.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a TOML config")
    run.add_argument("config", help="path to the configuration file")
    run.add_argument("--output", metavar="PREFIX", help="output prefix (overrides the config's 'output')")
    run.add_argument("--seed", type=int, metavar="N", help="master seed (overrides the config's 'seed')")
    verify = sub.add_parser("verify", help="run the built-in acceptance suite")
    verify.add_argument("--only", type=int, nargs="*", metavar="ID", help="run only these criteria")
    return parser


def _run(args) -> int:
    try:
        worker_count()
        cfg = load_config(args.config, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:       # PCL_THREADS
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        bundle = run_experiment(cfg)
    except ExperimentError as exc:
        print(f"{'numerical failure' if exc.numerical else 'error'}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL if exc.numerical else EXIT_CONFIG
    prefix = args.output or cfg.output
    try:
        paths = emit_results(bundle, prefix)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


def _verify(args) -> int:
    from .acceptance import run_acceptance

    results = run_acceptance(args.only, stream=sys.stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return _run(args) if args.command == "run" else _verify(args)


if __name__ == "__main__":
    sys.exit(main())
