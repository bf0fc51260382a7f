"""Merge a discovered graph with partial graph knowledge.

Steps, in order:

1. every domain edge enters at lag 0;
2. discovered directed edges survive only if they do not point from a higher
   level to a lower one;
3. undirected edges between different levels are oriented upward;
4. undirected edges within one level go to entropic orientation.

The result has no undirected edges and an acyclic lag-0 sub-graph.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .dataset import DiagnosticInput
from .domain_knowledge import PartialGraphKnowledge
from .entropy import EntropyConfig, OrientationOutcome, entropy_orientation
from .graph import CausalGraph, CycleError

log = logging.getLogger(__name__)


@dataclass
class EnhancementLog:
    """What the enhancement dropped or resolved, for reporting."""

    level_violations: list[tuple[str, str, int]] = field(default_factory=list)
    cycle_conflicts: list[tuple[str, str, int]] = field(default_factory=list)
    level_oriented: list[tuple[str, str]] = field(default_factory=list)
    entropy: OrientationOutcome | None = None


def enhance(g: CausalGraph, pk: PartialGraphKnowledge, inp: DiagnosticInput,
            config: EntropyConfig | None = None,
            record: EnhancementLog | None = None) -> CausalGraph:
    """Return the knowledge-enhanced graph (the input graph is not modified)."""
    record = record if record is not None else EnhancementLog()
    missing = set(g.vertices) - set(inp.dataset.metric_names)
    if missing:
        raise ValueError(f"graph vertices missing from the dataset: {sorted(missing)}")
    out = CausalGraph(g.vertices)
    for u, v in sorted(pk.domain_edges):
        for x in (u, v):
            if x not in out:
                out.add_vertex(x)
        try:
            out.add_directed(u, v, 0)
        except CycleError as exc:
            raise CycleError(f"domain edges create a cycle at {u!r} -> {v!r}") from exc

    level = pk.level
    for u, v, lag in g.directed_edges:
        if level(u) > level(v):
            record.level_violations.append((u, v, lag))
            continue
        if lag == 0 and out.has_directed(u, v, 0):
            continue
        if lag == 0 and out.would_create_cycle(u, v):
            record.cycle_conflicts.append((u, v, 0))
            log.info("discovered edge %s -> %s dropped: conflicts with domain edges", u, v)
            continue
        out.add_directed(u, v, lag)

    same_level = []
    for u, v in g.undirected_edges:
        if out.has_directed(u, v, 0) or out.has_directed(v, u, 0):
            continue
        if level(u) == level(v):
            same_level.append((u, v))
            continue
        a, b = (u, v) if level(u) < level(v) else (v, u)
        if out.would_create_cycle(a, b):
            record.cycle_conflicts.append((a, b, 0))
            log.info("level-oriented edge %s -> %s dropped: lag-0 cycle", a, b)
            continue
        out.add_directed(a, b, 0)
        record.level_oriented.append((a, b))

    record.entropy = entropy_orientation(same_level, out, inp.dataset.series, config)
    return out
