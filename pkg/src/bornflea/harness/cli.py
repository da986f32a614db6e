"""Command line: ``bornflea <experiment> --config PATH`` and ``bornflea validate --config PATH``."""
from __future__ import annotations

import argparse
import sys

from ..errors import BornFleaError, ConfigError
from .config import EXPERIMENTS, MAX_SEED, load_config
from .runner import run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bornflea", description="Born-rule flea experiments")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("validate", help="check a config and print it with defaults resolved")
    v.add_argument("--config", required=True)
    for name in EXPERIMENTS:
        e = sub.add_parser(name, help=f"run the {name} experiment")
        e.add_argument("--config", required=True)
        e.add_argument("--seed", type=int, default=None)
        e.add_argument("--out", default=None, help="CSV path (default: config output, else stdout)")
        e.add_argument("--threads", type=int, default=1)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"config: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "validate":
        print(cfg.to_json())
        return EXIT_OK
    if cfg.experiment != args.command:
        print(f"experiment: config is for {cfg.experiment!r}, not {args.command!r}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        if not 0 <= args.seed <= MAX_SEED:
            print("seed: must be an integer in [0, 2^64 - 1]", file=sys.stderr)
            return EXIT_CONFIG
        cfg = cfg.with_seed(args.seed)
    if args.threads < 1:
        print("threads: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        table = run(cfg, threads=args.threads)
    except BornFleaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = args.out or cfg.output
    if out:
        table.write(out)
    else:
        sys.stdout.write(table.to_csv())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
