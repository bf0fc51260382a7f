"""Simulation study: recall and precision of the pipeline per knowledge variant.

Variant names::

    nodk            no domain knowledge
    L               node levels from the ground-truth graph
    L10E/L25E/L50E  levels plus 10/25/50 % of the ground-truth lag-0 edges
    P_<variant>     the same knowledge, but refinement uses plain |Pearson|
    pcmci           raw discovery: every metric with a directed path to the target
"""
from __future__ import annotations

import csv
import io
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .anomaly_window import slice_3n
from .dataset import DiagnosticInput
from .domain_knowledge import DomainKnowledgeModel, PartialGraphKnowledge
from .discovery import discover
from .graph import CausalGraph
from .pipeline import PipelineConfig, analyse_window
from .refinement import RefinementConfig
from .simulator import GroundTruthGraph, SimRun, load_fixture, simulate_run

DEFAULT_LENGTH = 99
STANDARD_VARIANTS = ("nodk", "L", "L10E", "L25E", "L50E",
                  "P_nodk", "P_L", "P_L10E", "P_L25E", "P_L50E")
# wall-clock times live in a separate table so the results table is reproducible
RESULT_COLUMNS = ("graph_size", "variant", "recall", "precision", "runs", "seed")
TIMING_COLUMNS = ("graph_size", "variant", "mean_runtime_s", "runs")

_VARIANT_RE = re.compile(r"^(P_)?(nodk|L(?:(\d+)E)?)$")


class VariantError(ValueError):
    pass


@dataclass(frozen=True)
class VariantSpec:
    name: str
    use_levels: bool = False
    dk_edge_fraction: int = 0
    use_adjusted_score: bool = True
    raw_discovery: bool = False

    def __post_init__(self):
        if self.dk_edge_fraction > 0 and not self.use_levels:
            raise VariantError("domain edges require levels")
        if not 0 <= self.dk_edge_fraction <= 100:
            raise VariantError("edge fraction must be a percentage")

    @classmethod
    def parse(cls, name: str) -> "VariantSpec":
        name = name.strip()
        if name == "pcmci":
            return cls(name, raw_discovery=True)
        m = _VARIANT_RE.match(name)
        if not m:
            raise VariantError(f"unknown variant {name!r}")
        pearson, body, pct = m.groups()
        levels = body != "nodk"
        return cls(name, levels, int(pct or 0), use_adjusted_score=pearson is None)


def parse_variants(text: str | Iterable[str]) -> list[VariantSpec]:
    names = text.split(",") if isinstance(text, str) else list(text)
    return [VariantSpec.parse(n) for n in names if n.strip()]


def score_run(root_causes: Iterable[str], injected_root: str) -> tuple[bool, float]:
    """(hit, precision) of one run; precision is 0 for an empty answer."""
    rc = set(root_causes)
    hit = injected_root in rc
    return hit, (1.0 / len(rc) if hit else 0.0) if rc else 0.0


def topological_levels(graph: CausalGraph) -> dict[str, int]:
    """Longest-path-from-source rank over all directed edges, lags ignored."""
    preds: dict[str, set[str]] = {v: set() for v in graph.vertices}
    for u, v, _ in graph.directed_edges:
        if u != v:
            preds[v].add(u)
    level: dict[str, int] = {}
    remaining = set(graph.vertices)
    while remaining:
        ready = sorted(v for v in remaining if preds[v] <= set(level))
        if not ready:
            raise ValueError("graph is cyclic once lags are ignored; levels undefined")
        for v in ready:
            level[v] = 1 + max((level[p] for p in preds[v]), default=-1)
        remaining -= set(ready)
    return level


def make_dk_for_variant(gt: GroundTruthGraph, variant: VariantSpec, seed) -> DomainKnowledgeModel:
    if not variant.use_levels:
        return DomainKnowledgeModel.empty()
    levels = topological_levels(gt.graph)
    edges: list[tuple[str, str]] = []
    if variant.dk_edge_fraction:
        lag0 = sorted({(u, v) for u, v, lag in gt.graph.directed_edges if lag == 0})
        k = math.ceil(variant.dk_edge_fraction * len(lag0) / 100)
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(lag0), size=min(k, len(lag0)), replace=False)
        edges = [lag0[i] for i in sorted(pick)]
    return DomainKnowledgeModel(PartialGraphKnowledge(frozenset(edges), levels))


def run_seed(base_seed: int, size: int, run: int) -> int:
    return int(np.random.SeedSequence([base_seed, size, run]).generate_state(1)[0])


@dataclass
class RunOutcome:
    size: int
    run: int
    variant: str
    hit: bool
    precision: float
    runtime_s: float
    root_causes: tuple[str, ...]
    failed: bool = False


def _variant_config(base: PipelineConfig, variant: VariantSpec) -> PipelineConfig:
    if variant.use_adjusted_score:
        return base
    r = base.refinement
    return PipelineConfig(base.detection, base.discovery, base.entropy,
                          RefinementConfig(0, 1, r.shift_penalty, r.smooth_penalty, r.min_sim))


def evaluate_run(gt: GroundTruthGraph, variants: Sequence[VariantSpec], seed: int, run: int,
                 base_seed: int, config: PipelineConfig, length: int = DEFAULT_LENGTH,
                 sim: SimRun | None = None, min_sims: Sequence[float] | None = None) -> list[RunOutcome]:
    """All variants on one simulated dataset (discovery is shared between them)."""
    sim = sim or simulate_run(gt, length, seed)
    inp = slice_3n(DiagnosticInput(sim.dataset, gt.performance), sim.anomaly_window)
    t0 = time.perf_counter()
    try:
        discovered = discover(inp, config.discovery)
    except Exception:
        return [RunOutcome(gt.size, run, v.name, False, 0.0, 0.0, (), True) for v in variants]
    t_disc = time.perf_counter() - t0
    out = []
    for v in variants:
        t1 = time.perf_counter()
        if v.raw_discovery:
            roots = tuple(sorted(m for m in inp.candidates if discovered.has_causal_path(m, inp.target)))
            runtime = t_disc + time.perf_counter() - t1
            hit, prec = score_run(roots, sim.injected_root)
            out.append(RunOutcome(gt.size, run, v.name, hit, prec, runtime, roots))
            continue
        dk = make_dk_for_variant(gt, v, run_seed(base_seed + 1, gt.size, run))
        vcfg = _variant_config(config, v)
        sims = [None] if min_sims is None else list(min_sims)
        for ms in sims:
            cfg = vcfg if ms is None else vcfg.updated({"min_sim": ms})
            t1 = time.perf_counter()
            try:
                report = analyse_window(inp, dk, cfg, discovered=discovered).report
                roots = tuple(report.root_causes)
                failed = False
            except Exception:
                roots, failed = (), True
            runtime = t_disc + time.perf_counter() - t1
            hit, prec = score_run(roots, sim.injected_root)
            name = v.name if ms is None else f"{v.name}@{ms:g}"
            out.append(RunOutcome(gt.size, run, name, hit, prec, runtime, roots, failed))
    return out


@dataclass
class EvalResult:
    graph_size: int
    variant: str
    recall: float
    precision: float
    mean_runtime_s: float
    runs: int
    seed: int


def _task(args):
    size, gt_dict, variants, seed, run, base_seed, config, length, min_sims = args
    gt = GroundTruthGraph.from_dict(gt_dict)
    return evaluate_run(gt, variants, seed, run, base_seed, config, length, min_sims=min_sims)


def run_experiment(fixtures: Sequence[GroundTruthGraph] | Sequence[int], variants: Sequence[VariantSpec],
                   runs_per_graph: int = 50, seed: int = 0, config: PipelineConfig | None = None,
                   length: int = DEFAULT_LENGTH, jobs: int = 1,
                   min_sims: Sequence[float] | None = None) -> tuple[list[EvalResult], list[RunOutcome]]:
    """Evaluate every variant on ``runs_per_graph`` simulated runs per fixture."""
    config = config or PipelineConfig()
    graphs = [load_fixture(f) if isinstance(f, int) else f for f in fixtures]
    tasks = []
    for gt in graphs:
        for r in range(runs_per_graph):
            tasks.append((gt.size, gt.to_dict(), list(variants), run_seed(seed, gt.size, r), r,
                          seed, config, length, min_sims))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_task, tasks))
    else:
        chunks = [_task(t) for t in tasks]
    outcomes = [o for chunk in chunks for o in chunk]
    results = []
    keys = []
    for o in outcomes:
        if (o.size, o.variant) not in keys:
            keys.append((o.size, o.variant))
    for size, name in keys:
        sel = [o for o in outcomes if o.size == size and o.variant == name]
        results.append(EvalResult(
            size, name,
            float(np.mean([o.hit for o in sel])),
            float(np.mean([o.precision for o in sel])),
            float(np.mean([o.runtime_s for o in sel])),
            len(sel), seed))
    return results, outcomes


def results_to_csv(results: Sequence[EvalResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in results:
        w.writerow([r.graph_size, r.variant, f"{r.recall:.4f}", f"{r.precision:.4f}", r.runs, r.seed])
    return buf.getvalue()


def timings_to_csv(results: Sequence[EvalResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TIMING_COLUMNS)
    for r in results:
        w.writerow([r.graph_size, r.variant, f"{r.mean_runtime_s:.4f}", r.runs])
    return buf.getvalue()


def load_reference(path: str | Path | None = None) -> dict[tuple[int, str], tuple[float, float]]:
    """Reference (recall, precision) table; defaults to the bundled published values."""
    if path is None:
        text = (resources.files("radice") / "data" / "reference_results.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    out = {}
    for row in csv.DictReader(io.StringIO(text)):
        out[(int(row["graph_size"]), row["variant"])] = (float(row["recall"]), float(row["precision"]))
    return out


def compare(results: Sequence[EvalResult], reference: dict[tuple[int, str], tuple[float, float]]) -> list[dict]:
    rows = []
    for r in results:
        ref = reference.get((r.graph_size, r.variant))
        if ref is None:
            continue
        rows.append({"graph_size": r.graph_size, "variant": r.variant,
                     "recall": r.recall, "ref_recall": ref[0], "d_recall": r.recall - ref[0],
                     "precision": r.precision, "ref_precision": ref[1], "d_precision": r.precision - ref[1]})
    return rows
