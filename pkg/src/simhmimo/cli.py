"""Command-line entry point: ``simhmimo {fit,sweep,bounds,ber,baseline}``.

Exit status is 0 on success, 1 for configuration errors and 2 for runtime
failures. Diagnostics go to stderr; results go to ``--out`` or stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import harness
from .config import ConfigError, load

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
THREADS_ENV = "SIM_HMIMO_THREADS"


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="TOML experiment config")
    common.add_argument("--seed", type=int, help="master seed (overrides [experiment] master_seed)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--json", action="store_true", help="write JSON lines instead of CSV")
    common.add_argument("--threads", type=int, help=f"worker processes (fallback: ${THREADS_ENV}, else 1)")
    common.add_argument("--trials", type=int, help="override the number of Monte-Carlo trials")
    common.add_argument("--timing", action="store_true", help="fill wall_time_ms (makes output nondeterministic)")

    parser = argparse.ArgumentParser(prog="simhmimo", description="SIM-aided holographic MIMO simulations")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="fit the SIM phases for the base configuration")
    sub.add_parser("sweep", parents=[common], help="run the configured parameter sweep")
    sub.add_parser("bounds", parents=[common], help="ideal capacity versus its eigenvalue bounds")
    sub.add_parser("ber", parents=[common], help="BPSK bit error rate of the fitted link")
    sub.add_parser("baseline", parents=[common], help="conventional MIMO capacity baseline")
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        value = args.threads
    else:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError("--threads must be >= 1")
    return value


def _emit(rows, fieldnames, args, stdout):
    writer = harness.write_jsonl if args.json else harness.write_csv
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer(rows, fh, fieldnames)
    else:
        writer(rows, stdout, fieldnames)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = _parser().parse_args(argv)
    try:
        cfg = load(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.trials is not None:
            overrides["trials"] = args.trials
        cfg = replace(cfg, **overrides) if overrides else cfg
        threads = _threads(args)
        if args.command == "sweep" and cfg.sweep is None:
            raise ConfigError(f"{args.config}: the sweep command needs a [sweep] section")
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG

    try:
        if args.command == "fit":
            rows = harness.run_sweep(replace(cfg, sweep=None), threads, args.timing, include_aggregates=cfg.trials > 1)
            fields = harness.CSV_FIELDS
        elif args.command == "sweep":
            rows = harness.run_sweep(cfg, threads, args.timing)
            fields = harness.CSV_FIELDS
        elif args.command == "bounds":
            rows, fields = harness.run_bounds(cfg), harness.BOUNDS_FIELDS
        elif args.command == "ber":
            rows, fields = harness.run_ber(cfg), harness.BER_FIELDS
        else:
            rows, fields = harness.run_baseline(cfg), harness.BASELINE_FIELDS
        _emit(rows, fields, args, stdout)
    except Exception as exc:  # noqa: BLE001 - reported via exit status
        print(f"error: {exc}", file=stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
