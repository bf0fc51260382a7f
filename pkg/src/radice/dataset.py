"""Metric containers, CSV ingestion and the elementary series transforms.

Every later stage works on a :class:`TimeSeriesDataset` (N metrics by T
samples) wrapped in a :class:`DiagnosticInput` that names the performance
metric.  The transforms here (``normalize``, ``smooth``, ``shift``,
``pearson``) are the building blocks of the adjusted correlation score.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed or inconsistent metric data."""


@dataclass(frozen=True)
class TimeSeriesDataset:
    """Immutable N x T matrix of metric samples.

    Parameters
    ----------
    metric_names : sequence of str
        Unique, non-empty identifiers, one per row of ``values``.
    values : array_like of shape (N, T)
        Finite samples. Stored as a read-only float64 copy.
    sample_period : str, optional
        Informational only (e.g. ``"1h"``).
    timestamps : sequence of str, optional
        Original timestamp column, preserved on save.
    """

    metric_names: tuple[str, ...]
    values: np.ndarray
    sample_period: str | None = None
    timestamps: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        names = tuple(str(n) for n in self.metric_names)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            raise DataError(f"values must be 2-D (metrics x samples), got shape {values.shape}")
        if values.shape[0] != len(names):
            raise DataError(f"{len(names)} names for {values.shape[0]} series")
        if values.shape[1] < 1:
            raise DataError("series must have at least one sample")
        if any(not n for n in names):
            raise DataError("metric names must be non-empty")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate metric names: {dupes}")
        if not np.all(np.isfinite(values)):
            raise DataError("non-finite values in dataset")
        if self.timestamps is not None and len(self.timestamps) != values.shape[1]:
            raise DataError("timestamp column length differs from series length")
        values.setflags(write=False)
        object.__setattr__(self, "metric_names", names)
        object.__setattr__(self, "values", values)
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", tuple(self.timestamps))

    @property
    def n_metrics(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    def index(self, name: str) -> int:
        try:
            return self.metric_names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def series(self, name: str) -> np.ndarray:
        return self.values[self.index(name)]

    def window(self, start: int, stop: int) -> "TimeSeriesDataset":
        """Samples ``start <= t < stop`` of every metric."""
        if not 0 <= start < stop <= self.length:
            raise DataError(f"window [{start}, {stop}) outside [0, {self.length})")
        ts = None if self.timestamps is None else self.timestamps[start:stop]
        return TimeSeriesDataset(self.metric_names, self.values[:, start:stop],
                                 self.sample_period, ts)


@dataclass(frozen=True)
class DiagnosticInput:
    """A dataset plus the performance metric under diagnosis."""

    dataset: TimeSeriesDataset
    target: str

    def __post_init__(self):
        if self.target not in self.dataset.metric_names:
            raise DataError(f"target not found: {self.target!r}")

    @property
    def candidates(self) -> list[str]:
        return [m for m in self.dataset.metric_names if m != self.target]

    @property
    def target_series(self) -> np.ndarray:
        return self.dataset.series(self.target)


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path: str | Path, target: str, sample_period: str | None = None) -> DiagnosticInput:
    """Read a metric CSV (header row, one column per metric).

    A leading column is treated as a timestamp when its header is
    ``timestamp`` (any case) or when any of its cells is non-numeric.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if not body:
        raise DataError(f"{path}: no data rows")
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")

    has_ts = header[0].lower() == "timestamp" or any(not _is_number(r[0]) for r in body)
    first = 1 if has_ts else 0
    names = header[first:]
    if not names:
        raise DataError(f"{path}: no metric columns")
    if len(set(names)) != len(names):
        raise DataError(f"{path}: duplicate header names")
    if target not in names:
        raise DataError(f"target not found: {target!r}")

    values = np.empty((len(names), len(body)))
    for t, row in enumerate(body):
        for i, cell in enumerate(row[first:]):
            try:
                values[i, t] = float(cell)
            except ValueError:
                raise DataError(f"{path}:{t + 2}: non-numeric cell {cell!r} in column {names[i]!r}") from None
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: non-finite values")
    timestamps = tuple(r[0] for r in body) if has_ts else None
    ds = TimeSeriesDataset(tuple(names), values, sample_period, timestamps)
    return DiagnosticInput(ds, target)


def save_csv(dataset: TimeSeriesDataset, path: str | Path) -> None:
    """Write ``dataset`` so that :func:`load_csv` reproduces it bit for bit."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        ts = dataset.timestamps
        writer.writerow((["timestamp"] if ts is not None else []) + list(dataset.metric_names))
        for t in range(dataset.length):
            row = [repr(float(v)) for v in dataset.values[:, t]]
            writer.writerow(([ts[t]] if ts is not None else []) + row)


def rate_convert(counts: Sequence[float], totals: Sequence[float]) -> np.ndarray:
    """Turn event counts into rates in [0, 1] using their total counts."""
    counts = np.asarray(counts, dtype=float)
    totals = np.asarray(totals, dtype=float)
    if counts.shape != totals.shape:
        raise DataError("counts and totals differ in length")
    if np.any(totals <= 0):
        raise DataError("totals must be strictly positive")
    if np.any(counts < 0):
        raise DataError("counts must be non-negative")
    if np.any(counts > totals):
        raise DataError("count exceeds its total")
    return counts / totals


def normalize(x: Sequence[float]) -> np.ndarray:
    """Zero mean, unit population standard deviation; constant input gives zeros."""
    x = np.asarray(x, dtype=float)
    centred = x - x.mean()
    std = math.sqrt(float(np.mean(centred * centred)))
    if std == 0.0 or std < 1e-15 * max(1.0, float(np.max(np.abs(x)))):
        return np.zeros_like(x)
    return centred / std


def smooth(x: Sequence[float], w: int) -> np.ndarray:
    """Trailing moving average of width ``w``.

    The first ``w - 1`` outputs average over the samples available so far,
    so no future sample ever enters an output value.
    """
    x = np.asarray(x, dtype=float)
    if not 1 <= w <= len(x):
        raise DataError(f"smoothing width {w} outside [1, {len(x)}]")
    if w == 1:
        return x.copy()
    csum = np.concatenate(([0.0], np.cumsum(x)))
    t = np.arange(len(x))
    lo = np.maximum(0, t - w + 1)
    return (csum[t + 1] - csum[lo]) / (t + 1 - lo)


@dataclass(frozen=True)
class ShiftAlignment:
    """Pairing of ``x[t]`` with ``c[t - steps]`` for ``t`` in ``[steps, length)``."""

    steps: int
    length: int

    @property
    def overlap(self) -> int:
        return self.length - self.steps

    def apply(self, x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if len(x) != self.length or len(c) != self.length:
            raise DataError("series length does not match the alignment")
        return x[self.steps:], c[: self.length - self.steps]


def shift(c: Sequence[float], s: int) -> ShiftAlignment:
    """Align ``c`` so that its earlier samples face later samples of the target."""
    n = len(c)
    if not 0 <= s < n:
        raise DataError(f"shift {s} outside [0, {n})")
    return ShiftAlignment(s, n)


def pearson(a: Sequence[float], b: Sequence[float]) -> float:
    """Pearson correlation; 0.0 when either side is constant."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DataError("series lengths differ")
    if len(a) < 2:
        raise DataError("need at least two samples")
    da = a - a.mean()
    db = b - b.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    if saa == 0.0 or sbb == 0.0:
        return 0.0
    r = float(np.dot(da, db)) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))
