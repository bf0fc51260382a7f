"""Regenerate the bundled ground-truth graphs in ``src/radice/data``.

Each graph is layered like a request pipeline: source metrics at the bottom,
the performance metric as the single sink on top, and a few side metrics that
are affected by upstream changes without reaching the performance metric.
Metrics of one layer may also feed later metrics of the same layer.  Edges
never point downwards, so the graph stays acyclic even with lags ignored.

The 5-metric graph is written out by hand as a miniature of that shape: a
source feeding two parallel metrics that both reach the performance metric,
plus one side metric.

Eligible root causes are taken from the ``root_layers`` (counted from the
top, 1 = direct parents of the performance metric), alternating between them.
"""
from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from radice.graph import CausalGraph  # noqa: E402
from radice.simulator import GroundTruthGraph  # noqa: E402


@dataclass(frozen=True)
class Design:
    layers: tuple[int, ...]      # metrics per layer, bottom-up, sink excluded
    side: int                    # affected metrics with no path to the sink
    roots: int
    root_layers: tuple[int, ...]
    lag1_prob: float
    intra_prob: float            # chance of an edge between consecutive metrics of a layer
    two_parent_prob: float
    seed: int


SMALL = {
    "vertices": ["X0", "X1", "X2", "X3", "X4"],
    "directed": [["X0", "X1", 0], ["X0", "X2", 1], ["X1", "X3", 0], ["X2", "X3", 0], ["X1", "X4", 0]],
    "undirected": [],
    "performance": "X3",
    "eligible_roots": ["X1", "X2"],
    "name": "graph_n5",
}

DESIGNS = {
    10: Design((3, 3), 3, 3, (1,), 0.1, 0.3, 0.2, 12),
    15: Design((4, 4, 3), 3, 4, (1, 2), 0.1, 0.3, 0.2, 13),
    25: Design((5, 5, 5, 4), 5, 5, (2, 3), 0.1, 0.3, 0.2, 14),
}


def build(size: int, design: Design | None = None) -> GroundTruthGraph:
    if size == 5 and design is None:
        return GroundTruthGraph.from_dict(SMALL)
    d = design or DESIGNS[size]
    rng = np.random.default_rng(d.seed)
    names, layers = [], []
    for count in d.layers:
        layer = [f"X{len(names) + i}" for i in range(count)]
        names += layer
        layers.append(layer)
    perf = f"X{len(names)}"
    names.append(perf)
    side = [f"X{len(names) + i}" for i in range(d.side)]
    names += side
    if len(names) != size:
        raise ValueError(f"design gives {len(names)} metrics, expected {size}")

    g = CausalGraph(names)

    def link(u, v):
        if not g.has_directed(u, v):
            g.add_directed(u, v, int(rng.random() < d.lag1_prob))

    for k in range(1, len(layers)):
        below = layers[k - 1]
        for v in layers[k]:
            n_par = min(len(below), 1 + int(rng.random() < d.two_parent_prob))
            for u in rng.choice(below, size=n_par, replace=False):
                link(str(u), v)
    for k in range(len(layers) - 1):
        for u in layers[k]:
            if not any(e[0] == u for e in g.directed_edges):
                link(u, str(rng.choice(layers[k + 1])))
    for layer in layers:
        for u, v in zip(layer, layer[1:]):
            if rng.random() < d.intra_prob:
                link(u, v)
    for u in layers[-1]:
        link(u, perf)
    for k in range(len(layers) - 2):
        link(str(rng.choice(layers[k])), str(rng.choice(layers[k + 2])))
    for s in side:
        k = int(rng.integers(0, len(layers)))
        link(str(rng.choice(layers[k])), s)

    pools = [layers[-q] for q in d.root_layers if q <= len(layers)]
    order = [v for group in zip(*pools) for v in group]
    order += [v for pool in pools for v in pool if v not in order]
    roots = [v for v in order if g.has_causal_path(v, perf)][:d.roots]
    return GroundTruthGraph(g, {}, perf, roots, name=f"graph_n{size}")


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "src" / "radice" / "data"
    out.mkdir(parents=True, exist_ok=True)
    for size in (5, *DESIGNS):
        gt = build(size)
        d = gt.to_dict()
        d.pop("weights")  # weights are drawn per run
        (out / f"graph_n{size}.json").write_text(json.dumps(d, indent=1) + "\n", encoding="utf-8")
        lag0 = sum(1 for e in gt.graph.directed_edges if e[2] == 0)
        print(f"graph_n{size}: {len(gt.graph.directed_edges)} edges ({lag0} lag-0), roots {gt.eligible_roots}")


if __name__ == "__main__":
    main()
