"""Run the standard parameter sweeps and write raw + averaged CSVs.

    python scripts/sweeps.py --out results --runs 100
    python scripts/sweeps.py --only picos --runs 20

Per sweep this writes ``<name>.csv`` (one row per grid point, seed and
algorithm) and ``<name>_mean.csv`` (per grid point and algorithm means).
"""

import argparse
import csv
import time
from pathlib import Path

from cellmatch.harness import FIELDS, emit_csv, mean_by, run_experiment
from cellmatch.scenario import load_config

NUMERIC = [f for f in FIELDS if f not in ("grid", "algorithm", "outcome", "seed")]


def smartphone_mix(share):
    rest = (1.0 - share) / 2
    return (rest, rest, share)


SWEEPS = {
    # rate, utility and per-device utility as pico density grows
    "picos": {"num_users": [60], "num_picocells": [12, 18, 24, 30, 36]},
    # per-device utility, per-cell utility and iterations as users are added
    "users_p15": {"num_picocells": [15], "num_users": [3, 20, 40, 60, 80]},
    "users_p20": {"num_picocells": [20], "num_users": [3, 20, 40, 60, 80]},
    # share of small-screen devices
    "smartphone_share": {"num_users": [60], "num_picocells": [20],
                         "device_mix": [smartphone_mix(s) for s in (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)]},
}


def write_means(records, path):
    grids = list(dict.fromkeys(r.grid for r in records))
    algos = list(dict.fromkeys(r.algorithm for r in records))
    table = {(m, a): mean_by(records, m, a) for m in NUMERIC for a in algos}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["grid", "algorithm"] + NUMERIC)
        for g in grids:
            for a in algos:
                w.writerow([g, a] + [repr(table[m, a][g]) for m in NUMERIC])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--runs", type=int)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--only", nargs="*", choices=sorted(SWEEPS))
    args = ap.parse_args()

    config = load_config(args.config.read_text() if args.config else "")
    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.only or SWEEPS:
        t0 = time.time()
        records = run_experiment(config, SWEEPS[name], runs=args.runs, workers=args.workers)
        emit_csv(records, args.out / f"{name}.csv")
        write_means(records, args.out / f"{name}_mean.csv")
        print(f"{name}: {len(records)} records in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
