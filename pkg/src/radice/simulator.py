"""Synthetic metric data with a known root cause.

A ground-truth graph is a :class:`CausalGraph` with a weight per edge, a
performance metric and the set of metrics allowed to be picked as the root
cause.  Data follow a linear structural model with unit Gaussian noise; an
anomaly is a level shift in the root's noise over the central third of the
series, which reaches the root's descendants through the same equations.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .anomaly_window import AnomalyWindow
from .dataset import TimeSeriesDataset
from .graph import CausalGraph, GraphError

BURN_IN = 50
FIXTURE_SIZES = (5, 10, 15, 25)


class SimulationError(RuntimeError):
    pass


@dataclass
class GroundTruthGraph:
    graph: CausalGraph
    weights: dict[tuple[str, str, int], float]
    performance: str
    eligible_roots: list[str]
    name: str = ""

    def __post_init__(self):
        g = self.graph
        if self.performance not in g:
            raise GraphError(f"performance metric {self.performance!r} not in graph")
        if g.undirected_edges:
            raise GraphError("ground-truth graphs must be fully directed")
        if not g.is_lag0_acyclic():
            raise GraphError("ground-truth lag-0 sub-graph has a cycle")
        for e in g.directed_edges:
            self.weights.setdefault(e, 0.5)
        extra = set(self.weights) - set(g.directed_edges)
        if extra:
            raise GraphError(f"weights for unknown edges: {sorted(extra)}")
        if not all(np.isfinite(w) for w in self.weights.values()):
            raise GraphError("non-finite edge weight")
        for r in self.eligible_roots:
            if r not in g or not g.has_causal_path(r, self.performance):
                raise GraphError(f"eligible root {r!r} has no causal path to {self.performance!r}")

    @property
    def size(self) -> int:
        return len(self.graph.vertices)

    def to_dict(self) -> dict:
        d = self.graph.to_dict()
        d["weights"] = [[u, v, lag, self.weights[(u, v, lag)]] for u, v, lag in self.graph.directed_edges]
        d["performance"] = self.performance
        d["eligible_roots"] = list(self.eligible_roots)
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GroundTruthGraph":
        try:
            g = CausalGraph.from_dict(d)
            weights = {(u, v, int(lag)): float(w) for u, v, lag, w in d.get("weights", [])}
            return cls(g, weights, d["performance"], list(d["eligible_roots"]), d.get("name", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphError(f"malformed ground-truth graph: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "GroundTruthGraph":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: malformed JSON ({exc})") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")


def load_fixture(size: int) -> GroundTruthGraph:
    """One of the bundled 5/10/15/25-node ground-truth graphs."""
    ref = resources.files("radice") / "data" / f"graph_n{size}.json"
    return GroundTruthGraph.from_dict(json.loads(ref.read_text(encoding="utf-8")))


def randomize_weights(gt: GroundTruthGraph, seed, low: float = 0.1, high: float = 0.9) -> GroundTruthGraph:
    """Copy of ``gt`` with i.i.d. Uniform(low, high) edge weights."""
    rng = np.random.default_rng(seed)
    edges = gt.graph.directed_edges
    draws = rng.uniform(low, high, size=len(edges))
    return replace(gt, weights={e: float(w) for e, w in zip(edges, draws)})


def _structural_pass(gt: GroundTruthGraph, noise: np.ndarray) -> np.ndarray:
    names = gt.graph.vertices
    idx = {v: k for k, v in enumerate(names)}
    order = [idx[v] for v in gt.graph.lag0_topological_order()]
    incoming: dict[int, list[tuple[int, int, float]]] = {k: [] for k in range(len(names))}
    for (u, v, lag), w in gt.weights.items():
        incoming[idx[v]].append((idx[u], lag, w))
    for k in incoming:
        incoming[k].sort()
    x = np.zeros_like(noise)
    for t in range(noise.shape[1]):
        for j in order:
            acc = noise[j, t]
            for i, lag, w in incoming[j]:
                if t - lag >= 0:
                    acc += w * x[i, t - lag]
            x[j, t] = acc
    if not np.all(np.abs(x) < 1e6):
        raise SimulationError("simulated values exceed 1e6; rescale the edge weights")
    return x


def generate(gt: GroundTruthGraph, length: int, seed, noise: np.ndarray | None = None) -> TimeSeriesDataset:
    """Linear-Gaussian sample path of ``length`` steps after a burn-in of 50."""
    n = gt.size
    if noise is None:
        noise = np.random.default_rng(seed).standard_normal((n, length + BURN_IN))
    x = _structural_pass(gt, noise)
    return TimeSeriesDataset(tuple(gt.graph.vertices), x[:, BURN_IN:])


@dataclass
class SimRun:
    dataset: TimeSeriesDataset
    injected_root: str
    anomaly_window: AnomalyWindow
    affected: set[str]
    seed: int
    weights: dict[tuple[str, str, int], float] = field(default_factory=dict, repr=False)

    def to_manifest(self, csv_name: str) -> dict:
        return {
            "seed": self.seed,
            "csv": csv_name,
            "injected_root": self.injected_root,
            "window": {"start": self.anomaly_window.start, "end": self.anomaly_window.end},
            "affected": sorted(self.affected),
        }


def central_third(length: int) -> AnomalyWindow:
    n = length // 3
    return AnomalyWindow(n, 2 * n - 1)


def inject_anomaly(gt: GroundTruthGraph, length: int, seed: int, delta: float = 3.0,
                   root: str | None = None) -> SimRun:
    """Simulate one anomalous run on the (already weighted) graph ``gt``.

    The root's noise drops by ``delta`` over the central third, so with
    positive weights every affected metric, the performance one included, drops.
    """
    if not gt.eligible_roots:
        raise SimulationError("graph has no eligible root causes")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((gt.size, length + BURN_IN))
    if root is None:
        root = str(rng.choice(sorted(gt.eligible_roots)))
    window = central_third(length)
    perturbed = noise.copy()
    r = gt.graph.vertices.index(root)
    perturbed[r, BURN_IN + window.start: BURN_IN + window.end + 1] -= delta
    ds = generate(gt, length, None, noise=perturbed)
    affected = {root} | gt.graph.descendants(root)
    return SimRun(ds, root, window, affected, seed, dict(gt.weights))


def simulate_run(gt: GroundTruthGraph, length: int, seed: int, delta: float = 3.0) -> SimRun:
    """Randomise weights, then inject an anomaly; both driven by ``seed``."""
    wseed, rseed = np.random.SeedSequence(seed).spawn(2)
    weighted = randomize_weights(gt, wseed)
    return inject_anomaly(weighted, length, int(rseed.generate_state(1)[0]), delta)
