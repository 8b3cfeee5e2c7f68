"""Monte Carlo experiment driver, per-run metrics and CSV emission."""

import csv
import dataclasses
import io
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cellmatch.baseline import max_sinr_assignment
from cellmatch.matching import scbs_utility_matrix, solve, user_utility_matrix
from cellmatch.scenario import MACRO, generate_scenario
from cellmatch.utility import DEVICE_CLASSES

ALGORITHMS = ("matching", "max_sinr")


@dataclass(frozen=True)
class MetricsRecord:
    """Aggregates of one (grid point, seed, algorithm) run.

    ``*_pico`` columns average over users served by a small cell only;
    the others over all users. Empty groups are stored as None.
    """

    grid: str
    n_users: int
    n_picos: int
    seed: int
    algorithm: str
    outcome: str
    outer_iterations: int
    iterations_per_user: float
    offloaded_users: int
    avg_rate_per_user: float
    avg_utility_per_user: float
    avg_rate_pico: Optional[float]
    avg_utility_pico: Optional[float]
    utility_laptop: Optional[float]
    utility_tablet: Optional[float]
    utility_smartphone: Optional[float]
    utility_laptop_pico: Optional[float]
    utility_tablet_pico: Optional[float]
    utility_smartphone_pico: Optional[float]
    avg_utility_per_scbs: float

    def class_utility(self, label, pico_only=False):
        return getattr(self, f"utility_{label}{'_pico' if pico_only else ''}")


FIELDS = [f.name for f in dataclasses.fields(MetricsRecord)]
_INT_FIELDS = {"n_users", "n_picos", "seed", "outer_iterations", "offloaded_users"}
_STR_FIELDS = {"grid", "algorithm", "outcome"}


def _mean(x):
    return float(np.mean(x)) if len(x) else None


def evaluate(matching, scenario):
    """Metric dict for one association (everything but run bookkeeping)."""
    N = scenario.num_users
    idx = np.arange(N)
    cells = np.asarray(matching.assignment, dtype=int)
    U = user_utility_matrix(matching, scenario)[idx, cells]
    rates = scenario.rates[idx, cells] if N else np.zeros(0)
    on_pico = cells != MACRO
    labels = np.array([u.device_class.label for u in scenario.users])

    out = {
        "offloaded_users": int(on_pico.sum()),
        "avg_rate_per_user": _mean(rates) or 0.0,
        "avg_utility_per_user": _mean(U) or 0.0,
        "avg_rate_pico": _mean(rates[on_pico]),
        "avg_utility_pico": _mean(U[on_pico]),
    }
    for dc in DEVICE_CLASSES:
        mask = labels == dc.label
        out[f"utility_{dc.label}"] = _mean(U[mask])
        out[f"utility_{dc.label}_pico"] = _mean(U[mask & on_pico])

    # users reach a pico from the macro, so the macro is their origin cell
    S = scbs_utility_matrix(matching, scenario, origin=MACRO)
    per_cell = [S[list(matching.members(j)), j].sum() for j in range(1, len(scenario.cells))]
    out["avg_utility_per_scbs"] = float(np.mean(per_cell)) if per_cell else 0.0
    return out


def grid_label(point):
    return ";".join(f"{k}={v}" for k, v in point)


def _run_point(args):
    config, point, seed, algorithms = args
    cfg = config.replace(**dict(point))
    scenario = generate_scenario(cfg, seed)
    records = []
    for algo in algorithms:
        if algo == "matching":
            res = solve(scenario)
            matching, outcome = res.matching, res.outcome.value
            outer, ipu = res.outer_iterations, res.iterations_per_user
        elif algo == "max_sinr":
            matching = max_sinr_assignment(scenario)
            outcome, outer, ipu = "greedy", 1, 1.0 if scenario.num_users else 0.0
        else:
            raise ValueError(f"unknown algorithm {algo!r}")
        records.append(MetricsRecord(
            grid=grid_label(point), n_users=cfg.num_users, n_picos=cfg.num_picocells,
            seed=seed, algorithm=algo, outcome=outcome, outer_iterations=outer,
            iterations_per_user=ipu, **evaluate(matching, scenario)))
    return records


class GridPointError(RuntimeError):
    pass


def _run_checked(task):
    try:
        return _run_point(task)
    except Exception as exc:
        raise GridPointError(f"grid point {grid_label(task[1]) or '(default)'}, seed {task[2]}: {exc}") from exc


def run_experiment(config, sweep=None, runs=None, algorithms=ALGORITHMS, workers=1):
    """Run every grid point of ``sweep`` for seeds ``rng_seed .. rng_seed+runs-1``.

    ``sweep`` maps Config field names to value lists; the grid is their
    Cartesian product in insertion order. Both algorithms see the same
    scenario for a given (grid point, seed). Output order is
    (grid point, seed, algorithm) whatever ``workers`` is.
    """
    sweep = sweep or {}
    runs = config.monte_carlo_runs if runs is None else runs
    keys = list(sweep)
    points = [tuple(zip(keys, vals)) for vals in itertools.product(*(sweep[k] for k in keys))]
    for point in points:
        try:
            config.replace(**dict(point))
        except (TypeError, ValueError) as exc:
            raise GridPointError(f"grid point {grid_label(point)}: {exc}") from exc
    tasks = [(config, point, config.rng_seed + k, tuple(algorithms)) for point in points for k in range(runs)]

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_checked, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        chunks = [_run_checked(task) for task in tasks]
    return [r for chunk in chunks for r in chunk]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(records, destination):
    """Write ``records`` as CSV to a path or text stream; columns follow FIELDS."""
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            return emit_csv(records, fh)
    w = csv.writer(destination, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([_fmt(getattr(r, f)) for f in FIELDS])


def records_to_csv(records):
    buf = io.StringIO()
    emit_csv(records, buf)
    return buf.getvalue()


def read_csv(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="", encoding="utf-8") as fh:
            return read_csv(fh)
    out = []
    for row in csv.DictReader(source):
        kw = {}
        for f in FIELDS:
            v = row[f]
            if f in _STR_FIELDS:
                kw[f] = v
            elif v == "":
                kw[f] = None
            elif f in _INT_FIELDS:
                kw[f] = int(v)
            else:
                kw[f] = float(v)
        out.append(MetricsRecord(**kw))
    return out


GAIN_METRICS = ("avg_rate_per_user", "avg_utility_per_user", "avg_utility_per_scbs")


def mean_by(records, metric, algorithm):
    """Mean of ``metric`` per grid label for one algorithm, skipping None."""
    groups = {}
    for r in records:
        if r.algorithm != algorithm:
            continue
        v = getattr(r, metric)
        groups.setdefault(r.grid, [])
        if v is not None:
            groups[r.grid].append(v)
    return {g: (float(np.mean(v)) if v else math.nan) for g, v in groups.items()}


def summarize_gain(records, metrics=GAIN_METRICS):
    """Relative gain ``(matching - max_sinr) / |max_sinr|`` per grid point and metric."""
    rows = []
    grids = list(dict.fromkeys(r.grid for r in records))
    for metric in metrics:
        ours = mean_by(records, metric, "matching")
        base = mean_by(records, metric, "max_sinr")
        for g in grids:
            if g not in ours or g not in base:
                raise ValueError(f"grid point {g!r} lacks a matching/max_sinr pair")
            b = base[g]
            gain = (ours[g] - b) / abs(b) if b else math.copysign(math.inf, ours[g] - b) if ours[g] != b else 0.0
            rows.append({"grid": g, "metric": metric, "matching": ours[g], "max_sinr": b, "gain": gain})
    return rows
