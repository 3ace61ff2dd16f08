"""Deterministic comparison metrics between two time series."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from quantum_dynamo.exceptions import ArgumentError


class Metric(str, Enum):
    MAX_ABS = "max_abs"
    RMS = "rms"
    REL_AT_MARKS = "rel_at_marks"


@dataclass(frozen=True)
class ComparisonReport:
    metric: Metric
    value: float
    n_samples: int
    worst_t: Optional[float] = None

    def as_dict(self) -> dict:
        return {"metric": self.metric.value, "value": self.value, "n_samples": self.n_samples, "worst_t": self.worst_t}


def compare(
    series_a,
    series_b,
    metric: Metric = Metric.MAX_ABS,
    t: Optional[Sequence[float]] = None,
    marks: Optional[Sequence[float]] = None,
) -> ComparisonReport:
    """Compare two equally sampled series.

    ``rel_at_marks`` evaluates |a - b| / |b| at the given mark times (linear
    interpolation on ``t``) and reports the largest value. NaN samples are
    skipped.
    """
    a = np.asarray(series_a, dtype=float)
    b = np.asarray(series_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ArgumentError(f"series shapes differ: {a.shape} vs {b.shape}")
    t_arr = np.arange(a.size, dtype=float) if t is None else np.asarray(t, dtype=float)
    metric = Metric(metric)
    keep = np.isfinite(a) & np.isfinite(b)
    if not np.any(keep):
        raise ArgumentError("no finite samples to compare")
    a, b, t_arr = a[keep], b[keep], t_arr[keep]
    diff = np.abs(a - b)

    if metric is Metric.MAX_ABS:
        i = int(np.argmax(diff))
        return ComparisonReport(metric, float(diff[i]), a.size, float(t_arr[i]))
    if metric is Metric.RMS:
        return ComparisonReport(metric, float(np.sqrt(np.mean(diff**2))), a.size)
    if not marks:
        raise ArgumentError("rel_at_marks needs mark times")
    a_m = np.interp(marks, t_arr, a)
    b_m = np.interp(marks, t_arr, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(a_m - b_m) / np.abs(b_m)
    i = int(np.nanargmax(rel))
    return ComparisonReport(metric, float(rel[i]), len(marks), float(marks[i]))


def compare_files(
    path_a,
    path_b,
    column: str,
    metric: Metric = Metric.MAX_ABS,
    marks: Optional[Sequence[float]] = None,
) -> ComparisonReport:
    """Compare one column of two CSV tables; b is interpolated onto the times of a."""
    frame_a = pd.read_csv(path_a)
    frame_b = pd.read_csv(path_b)
    for name, frame in (("first", frame_a), ("second", frame_b)):
        if column not in frame or "t" not in frame:
            raise ArgumentError(f"{name} table lacks column 't' or {column!r}")
    t = frame_a["t"].to_numpy()
    b = np.interp(t, frame_b["t"].to_numpy(), frame_b[column].to_numpy())
    return compare(frame_a[column].to_numpy(), b, metric, t=t, marks=marks)
