"""Locate the performance drop and cut the 3n-sample analysis window."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import median_filter

from .dataset import DiagnosticInput

# normal-consistency constant for the MAD
MAD_SCALE = 1.4826


class NoAnomalyError(ValueError):
    """No sample run falls below the detection threshold."""


class WindowError(ValueError):
    """The window cannot be flanked by n samples on each side."""


@dataclass(frozen=True)
class AnomalyWindow:
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise WindowError(f"invalid window [{self.start}, {self.end}]")

    @property
    def n(self) -> int:
        return self.end - self.start + 1

    def check_flanks(self, length: int) -> None:
        n = self.n
        if n < 2:
            raise WindowError("anomaly window must span at least 2 samples")
        if self.start < n or self.end + n >= length:
            raise WindowError(
                f"window [{self.start}, {self.end}] needs {n} samples on each side "
                f"within a series of length {length}")

    @classmethod
    def parse(cls, text: str) -> "AnomalyWindow":
        """Parse ``"START:END"`` (inclusive sample indices)."""
        try:
            a, b = text.split(":")
            return cls(int(a), int(b))
        except ValueError:
            raise WindowError(f"expected START:END, got {text!r}") from None


@dataclass(frozen=True)
class DetectionConfig:
    """Robust z-score detection of a drop.

    ``filter_width`` applies a centred running median before scoring (1 disables
    it); runs separated by at most ``max_gap`` unflagged samples are merged.
    """

    z_threshold: float = 3.0
    filter_width: int = 1
    max_gap: int = 0

    def __post_init__(self):
        if self.z_threshold <= 0:
            raise ValueError("z_threshold must be positive")
        if self.filter_width < 1:
            raise ValueError("filter_width must be >= 1")
        if self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")


def robust_z(x: np.ndarray) -> np.ndarray | None:
    """Median/MAD z-scores; plain mean/std z-scores when the MAD is 0.

    Returns ``None`` for a constant series.
    """
    x = np.asarray(x, dtype=float)
    med = float(np.median(x))
    dev = np.abs(x - med)
    mad = float(np.median(dev))
    if mad > 0:
        return (x - med) / (MAD_SCALE * mad)
    sd = float(np.std(x))
    if sd > 0:
        return (x - np.mean(x)) / sd
    return None


def _runs(mask: np.ndarray, max_gap: int) -> list[tuple[int, int]]:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    runs = []
    start = prev = int(idx[0])
    for i in idx[1:]:
        i = int(i)
        if i - prev - 1 > max_gap:
            runs.append((start, prev))
            start = i
        prev = i
    runs.append((start, prev))
    return runs


def detect_window(x, config: DetectionConfig | None = None) -> AnomalyWindow:
    """Find the drop of the performance series.

    The chosen window is the flagged run (z below ``-z_threshold``) with the
    largest cumulative deviation; ties go to the earlier run.
    """
    config = config or DetectionConfig()
    x = np.asarray(x, dtype=float)
    if len(x) < 6:
        raise WindowError("need at least 6 samples to flank a 2-sample window")
    if config.filter_width > 1:
        x = median_filter(x, size=config.filter_width, mode="nearest")
    z = robust_z(x)
    if z is None:
        raise NoAnomalyError("no anomaly detected")
    runs = _runs(z < -config.z_threshold, config.max_gap)
    if not runs:
        raise NoAnomalyError("no anomaly detected")
    best = max(runs, key=lambda r: (float(-z[r[0]:r[1] + 1].sum()), -r[0]))
    window = AnomalyWindow(*best)
    if window.n < 2:
        raise NoAnomalyError("no anomaly detected (only an isolated outlier)")
    window.check_flanks(len(x))
    return window


def slice_3n(inp: DiagnosticInput, window: AnomalyWindow) -> DiagnosticInput:
    """Restrict every metric to ``[start - n, end + n]`` (exactly 3n samples)."""
    window.check_flanks(inp.dataset.length)
    n = window.n
    return DiagnosticInput(inp.dataset.window(window.start - n, window.end + n + 1), inp.target)
