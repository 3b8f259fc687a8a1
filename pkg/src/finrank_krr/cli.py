"""``finrank-krr`` command-line entry point."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from . import __version__
from .experiments import COMMANDS, ExperimentConfig
from .validation import run_validation, write_report


def _on_off(value):
    if value not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return value == "on"


def _u64(value):
    v = int(value)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="finrank-krr",
        description="Exact test error and bounds for finite-rank kernel ridge regression.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted([*COMMANDS, "validate"]))
    parser.add_argument("--config", help="experiment config JSON (not needed for validate)")
    parser.add_argument("--out", help="output directory (overrides config output_dir)")
    parser.add_argument("--seed", type=_u64, help="master seed (overrides config)")
    parser.add_argument("--trials", type=int, help="trials per grid point (overrides config)")
    parser.add_argument("--residue", type=_on_off, help="include residue terms in bounds")
    parser.add_argument("--workers", type=int, help="process pool size for trials")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config(args):
    if not args.config:
        raise SystemExit("error: --config is required for this command")
    cfg = ExperimentConfig.load(args.config)
    overrides = {
        "output_dir": args.out,
        "seed": args.seed,
        "trials": args.trials,
        "residue": args.residue,
        "workers": args.workers,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return dataclasses.replace(cfg, **overrides) if overrides else cfg


def _validate(args):
    seed = args.seed if args.seed is not None else 0
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    report = run_validation(seed)
    path = os.path.join(out, "validate.json")
    write_report(report, path)
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    for name in failed:
        print(f"FAILED {name}", file=sys.stderr)
    print(f"validate: {len(report['checks']) - len(failed)}/{len(report['checks'])} checks "
          f"passed; report at {path}")
    return 1 if failed else 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return _validate(args)
        path = COMMANDS[args.command](_config(args))
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
