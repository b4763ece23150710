"""Error-vs-N curves with fitted power-law slopes, from sweep CSVs (schema=1)."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

SCHEMA_LINE = "# schema=1"


class SchemaMismatch(ValueError):
    """The CSV is not a schema=1 sweep file or lacks a referenced column."""


class EmptyGroup(ValueError):
    """A group has fewer than two distinct N values; no slope can be fit."""


@dataclass(frozen=True)
class PlotSpec:
    csv_paths: tuple
    out_path: str
    group_by: tuple = ("estimator",)
    x_column: str = "N"
    y_column: str = "op_error"
    seed_column: str = "seed"

    def __init__(self, csv_paths, out_path, group_by=("estimator",),
                 x_column="N", y_column="op_error", seed_column="seed"):
        if isinstance(csv_paths, str):
            csv_paths = (csv_paths,)
        object.__setattr__(self, "csv_paths", tuple(csv_paths))
        object.__setattr__(self, "out_path", out_path)
        if isinstance(group_by, str):
            group_by = tuple(group_by.split(","))
        object.__setattr__(self, "group_by", tuple(group_by))
        object.__setattr__(self, "x_column", x_column)
        object.__setattr__(self, "y_column", y_column)
        object.__setattr__(self, "seed_column", seed_column)


def read_sweep_csv(path: str) -> list[dict]:
    """Rows of a schema=1 CSV as dicts; comment lines are skipped."""
    with open(path) as fh:
        first = fh.readline().rstrip("\n")
        if first != SCHEMA_LINE:
            raise SchemaMismatch(f"{path}: first line {first!r} != {SCHEMA_LINE!r}")
        reader = csv.reader(line for line in fh if not line.startswith("#"))
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: no header row")
        return [dict(zip(header, row)) for row in reader]


def fit_loglog_slope(Ns: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log N."""
    lo = np.log(np.asarray(Ns, dtype=float))
    le = np.log(np.asarray(ys, dtype=float))
    return float(np.polyfit(lo, le, 1)[0])


def _aggregate(rows, spec):
    """Per group: sorted N values with median and interquartile band of y."""
    groups: dict = {}
    for row in rows:
        for col in (*spec.group_by, spec.x_column, spec.y_column):
            if col not in row:
                raise SchemaMismatch(f"column {col!r} missing from CSV")
        if row[spec.y_column] in ("", None):  # per-run failure rows carry no value
            continue
        key = tuple(row[c] for c in spec.group_by)
        groups.setdefault(key, {}).setdefault(int(row[spec.x_column]), []) \
            .append(float(row[spec.y_column]))
    out = {}
    for key, by_n in groups.items():
        Ns = sorted(by_n)
        if len(Ns) < 2:
            raise EmptyGroup(f"group {key} has {len(Ns)} distinct {spec.x_column} values")
        med = [float(np.median(by_n[N])) for N in Ns]
        q25 = [float(np.percentile(by_n[N], 25)) for N in Ns]
        q75 = [float(np.percentile(by_n[N], 75)) for N in Ns]
        out[key] = (Ns, med, q25, q75)
    return out


def plot_error_curves(spec: PlotSpec) -> dict:
    """Render log-log error curves with median/IQR and per-group fitted slopes.

    Returns {group label: slope}. Heavy-tailed errors under marginal
    stability make the median the right center line; the shaded band is the
    interquartile range over seeds.
    """
    rows = []
    for path in spec.csv_paths:
        rows.extend(read_sweep_csv(path))
    groups = _aggregate(rows, spec)
    if not groups:
        raise EmptyGroup("no data rows with a usable y value")

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    slopes = {}
    for key in sorted(groups):
        Ns, med, q25, q75 = groups[key]
        label = "/".join(key)
        slope = fit_loglog_slope(Ns, med)
        slopes[label] = slope
        line, = ax.loglog(Ns, med, marker="o", label=f"{label} (slope {slope:+.2f})")
        ax.fill_between(Ns, q25, q75, alpha=0.2, color=line.get_color())
    ax.set_xlabel(spec.x_column)
    ax.set_ylabel(spec.y_column)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out_path, dpi=120)
    plt.close(fig)
    return slopes
