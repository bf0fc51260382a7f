"""Plot data and a small SVG line chart of the metrics in a diagnosis."""
from __future__ import annotations

import csv
import io
from html import escape
from typing import Sequence

import numpy as np

from .anomaly_window import AnomalyWindow
from .dataset import TimeSeriesDataset

WIDTH, HEIGHT = 1000, 400
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def phase_of(t: int, window: AnomalyWindow) -> str:
    if t < window.start:
        return "pre"
    return "anomaly" if t <= window.end else "post"


def plot_rows(dataset: TimeSeriesDataset, metrics: Sequence[str],
              window: AnomalyWindow) -> list[tuple[str, int, float, str]]:
    """Long-format rows ``(metric, t, value, phase)`` over ``[start - n, end + n]``."""
    lo, hi = window.start - window.n, window.end + window.n
    rows = []
    for m in metrics:
        x = dataset.series(m)
        for t in range(lo, hi + 1):
            rows.append((m, t, float(x[t]), phase_of(t, window)))
    return rows


def plot_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("metric", "t", "value", "phase"))
    for m, t, v, ph in rows:
        w.writerow((m, t, repr(v), ph))
    return buf.getvalue()


def read_plot_csv(text: str) -> list[tuple[str, int, float, str]]:
    reader = csv.DictReader(io.StringIO(text))
    return [(r["metric"], int(r["t"]), float(r["value"]), r["phase"]) for r in reader]


def plot_svg(rows, window: AnomalyWindow, title: str = "") -> str:
    """Line chart with every series min-max scaled to the plot height."""
    series: dict[str, list[tuple[int, float]]] = {}
    for m, t, v, _ in rows:
        series.setdefault(m, []).append((t, v))
    left, right, top, bottom = 60, WIDTH - 200, 30, HEIGHT - 40
    ts = [t for pts in series.values() for t, _ in pts] or [window.start, window.end]
    t0, t1 = min(ts), max(ts)
    span = max(t1 - t0, 1)

    def px(t: float) -> float:
        return left + (t - t0) / span * (right - left)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    band_l, band_r = px(window.start - 0.5), px(window.end + 0.5)
    band_l, band_r = max(band_l, left), min(band_r, right)
    out.append(f'<rect class="anomaly" x="{band_l:.1f}" y="{top}" width="{band_r - band_l:.1f}" '
               f'height="{bottom - top}" fill="#f4cccc" fill-opacity="0.6"/>')
    out.append(f'<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>')
    out.append(f'<text x="{left}" y="{HEIGHT - 15}" font-size="12">t={t0}</text>')
    out.append(f'<text x="{right}" y="{HEIGHT - 15}" font-size="12" text-anchor="end">t={t1}</text>')
    if title:
        out.append(f'<text x="{left}" y="20" font-size="14">{escape(title)}</text>')
    for k, (m, pts) in enumerate(series.items()):
        colour = PALETTE[k % len(PALETTE)]
        vals = np.array([v for _, v in pts])
        lo, hi = float(vals.min()), float(vals.max())
        scale = (hi - lo) or 1.0
        coords = " ".join(f"{px(t):.1f},{bottom - (v - lo) / scale * (bottom - top):.1f}" for t, v in pts)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{coords}">'
                   f'<title>{escape(m)}</title></polyline>')
        y = top + 10 + 18 * k
        out.append(f'<line x1="{right + 20}" y1="{y}" x2="{right + 40}" y2="{y}" stroke="{colour}" '
                   f'stroke-width="3"/>')
        out.append(f'<text x="{right + 46}" y="{y + 4}" font-size="12">{escape(m)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
