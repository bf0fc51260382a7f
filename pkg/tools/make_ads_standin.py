"""Regenerate the synthetic advertising-system data set in ``src/radice/data``.

Three days of hourly rate metrics from two kinds of components, a demand-side
platform (``dsp_*``) and an ad exchange (``adx_*``), plus ``exposure_rate``,
the share of ads that reached users.  Two incidents are planted:

* hours 20-28: the DSP fail rate rises, fewer bids succeed, exposure drops;
* hours 50-58: the exchange filters more requests, exposure drops less.

Values are generated by a signed linear model on standardised latents and
then mapped into [0, 1] around a per-metric base rate.  The companion domain
knowledge puts DSP metrics below exchange metrics, lists nine known edges and
one sign rule per metric type.
"""
from __future__ import annotations

import json
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

LENGTH = 72
INCIDENTS = (("dsp_fail_rate", 20, 28, 4.0), ("adx_filter_rate", 50, 58, 3.0))

# metric -> (base rate, spread)
METRICS = {
    "dsp_request_rate": (0.90, 0.02),
    "dsp_fail_rate": (0.05, 0.01),
    "dsp_timeout_rate": (0.03, 0.01),
    "dsp_filter_rate": (0.10, 0.02),
    "dsp_bid_rate": (0.70, 0.03),
    "dsp_success_rate": (0.60, 0.03),
    "dsp_pctr": (0.020, 0.002),
    "dsp_pcvr": (0.010, 0.001),
    "dsp_ecpm": (0.40, 0.03),
    "adx_request_rate": (0.95, 0.01),
    "adx_filter_rate": (0.08, 0.02),
    "adx_fail_rate": (0.04, 0.01),
    "adx_timeout_rate": (0.02, 0.005),
    "adx_bid_rate": (0.65, 0.03),
    "adx_win_rate": (0.30, 0.03),
    "adx_success_rate": (0.55, 0.03),
    "adx_fill_rate": (0.50, 0.03),
    "adx_ecpm": (0.35, 0.03),
    "exposure_rate": (0.45, 0.03),
}

# (cause, effect, weight) on standardised latents, listed in causal order
EDGES = [
    ("dsp_request_rate", "dsp_bid_rate", 0.5),
    ("dsp_fail_rate", "dsp_success_rate", -0.8),
    ("dsp_timeout_rate", "dsp_success_rate", -0.4),
    ("dsp_filter_rate", "dsp_bid_rate", -0.6),
    ("dsp_bid_rate", "dsp_success_rate", 0.5),
    ("dsp_pctr", "dsp_ecpm", 0.6),
    ("dsp_pcvr", "dsp_ecpm", 0.5),
    ("dsp_success_rate", "adx_bid_rate", 0.8),
    ("dsp_ecpm", "adx_ecpm", 0.7),
    ("adx_request_rate", "adx_filter_rate", 0.3),
    ("adx_filter_rate", "adx_fill_rate", -0.8),
    ("adx_fail_rate", "adx_success_rate", -0.6),
    ("adx_timeout_rate", "adx_success_rate", -0.3),
    ("adx_bid_rate", "adx_win_rate", 0.6),
    ("adx_ecpm", "adx_win_rate", 0.4),
    ("adx_win_rate", "adx_success_rate", 0.7),
    ("adx_bid_rate", "adx_fill_rate", 0.5),
    ("adx_success_rate", "exposure_rate", 0.7),
    ("adx_fill_rate", "exposure_rate", 0.6),
]

DOMAIN_EDGES = [
    ("dsp_fail_rate", "dsp_success_rate"),
    ("dsp_bid_rate", "dsp_success_rate"),
    ("dsp_success_rate", "adx_bid_rate"),
    ("dsp_ecpm", "adx_ecpm"),
    ("adx_filter_rate", "adx_fill_rate"),
    ("adx_bid_rate", "adx_win_rate"),
    ("adx_win_rate", "adx_success_rate"),
    ("adx_success_rate", "exposure_rate"),
    ("adx_fill_rate", "exposure_rate"),
]

# a drop in exposure caused by a metric means the metric moved the "bad" way
SIGN_BY_KIND = {
    "fail": "negative", "timeout": "negative", "filter": "negative",
    "request": "positive", "bid": "positive", "success": "positive", "win": "positive",
    "fill": "positive", "ecpm": "positive", "pctr": "positive", "pcvr": "positive",
}


def simulate(seed: int = 2024) -> np.ndarray:
    rng = np.random.default_rng(seed)
    names = list(METRICS)
    idx = {m: k for k, m in enumerate(names)}
    z = rng.standard_normal((len(names), LENGTH)) * 0.15
    for metric, start, end, size in INCIDENTS:
        z[idx[metric], start:end + 1] += size
    for u, v, w in EDGES:
        z[idx[v]] += w * z[idx[u]]
    values = np.empty_like(z)
    for m, k in idx.items():
        base, spread = METRICS[m]
        values[k] = np.clip(base + spread * z[k], 0.0, 1.0)
    return values


def knowledge() -> dict:
    levels = {m: (1 if m.startswith("dsp_") else 2) for m in METRICS}
    levels["exposure_rate"] = 3
    rules = {}
    for m in METRICS:
        if m == "exposure_rate":
            continue
        kind = m.split("_")[1]
        rules[m] = SIGN_BY_KIND[kind]
    return {"levels": levels, "edges": [list(e) for e in DOMAIN_EDGES], "rules": rules}


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "radice" / "data"
    values = simulate()
    t0 = datetime(2023, 5, 1)
    lines = ["timestamp," + ",".join(METRICS)]
    for t in range(LENGTH):
        stamp = (t0 + timedelta(hours=t)).strftime("%Y-%m-%dT%H:%M:%S")
        lines.append(stamp + "," + ",".join(f"{v:.6f}" for v in values[:, t]))
    (out / "ads_standin.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    (out / "ads_standin_dk.json").write_text(json.dumps(knowledge(), indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(METRICS)} metrics x {LENGTH} hours")


if __name__ == "__main__":
    main()
