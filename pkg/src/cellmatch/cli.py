"""Command line entry point: ``python -m cellmatch run|gain ...``."""

import argparse
import csv
import sys
from pathlib import Path

from cellmatch.harness import ALGORITHMS, GridPointError, emit_csv, read_csv, run_experiment, summarize_gain
from cellmatch.scenario import load_config


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="cellmatch")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte Carlo sweep, one CSV row per (grid point, seed, algorithm)")
    run.add_argument("--config", type=Path, help="key = value file; absent keys keep defaults")
    run.add_argument("--users", type=_int_list, help="N values, e.g. 3,20,40")
    run.add_argument("--picos", type=_int_list, help="P values, e.g. 12,24,36")
    run.add_argument("--runs", type=int, help="seeds per grid point (default: monte_carlo_runs)")
    run.add_argument("--seed", type=int, help="first seed (default: rng_seed)")
    run.add_argument("--algorithms", default=",".join(ALGORITHMS))
    run.add_argument("--hf-threshold", type=float)
    sign = run.add_mutually_exclusive_group()
    sign.add_argument("--literal-load", action="store_true", help="charge -gamma*(q-m): penalize free capacity")
    sign.add_argument("--reward-free-capacity", action="store_true", help="charge +gamma*(q-m) (default)")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default="-", help="CSV path, '-' for stdout")

    gain = sub.add_parser("gain", help="relative gain of matching over max-SINR per grid point")
    gain.add_argument("csv", type=Path)
    gain.add_argument("--out", default="-")
    return p


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w", newline="", encoding="utf-8")


def cmd_run(args):
    config = load_config(args.config.read_text(encoding="utf-8") if args.config else "")
    changes = {}
    if args.seed is not None:
        changes["rng_seed"] = args.seed
    if args.hf_threshold is not None:
        changes["hf_threshold"] = args.hf_threshold
    if args.literal_load:
        changes["load_sign"] = 1.0
    elif args.reward_free_capacity:
        changes["load_sign"] = -1.0
    config = config.replace(**changes)

    sweep = {}
    if args.picos:
        sweep["num_picocells"] = args.picos
    if args.users:
        sweep["num_users"] = args.users
    algorithms = tuple(a.strip() for a in args.algorithms.split(",") if a.strip())
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)}")

    records = run_experiment(config, sweep, runs=args.runs, algorithms=algorithms, workers=args.workers)
    out = _open_out(args.out)
    try:
        emit_csv(records, out)
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_gain(args):
    rows = summarize_gain(read_csv(args.csv))
    out = _open_out(args.out)
    try:
        w = csv.DictWriter(out, fieldnames=["grid", "metric", "matching", "max_sinr", "gain"], lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    finally:
        if out is not sys.stdout:
            out.close()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cmd_run(args)
        else:
            cmd_gain(args)
    except GridPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
