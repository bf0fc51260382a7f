"""Trim the enhanced graph down to the root-cause sub-graph.

Candidates are processed from the highest level down (then by score).  For
each one the kept path to the performance metric is the one through the most
candidates, then the shortest, then the lexicographically smallest.
Candidates with no path are dropped.  Finally every enhanced-graph edge whose
endpoints both made it into the sub-graph is added back.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping

from .anomaly_window import AnomalyWindow
from .domain_knowledge import PartialGraphKnowledge
from .graph import DEFAULT_PATH_LIMIT, CausalGraph
from .refinement import AdjustedScore

log = logging.getLogger(__name__)


@dataclass
class RootCauseReport:
    target: str
    root_causes: dict[str, AdjustedScore]
    sub_graph: CausalGraph
    window: AnomalyWindow | None = None
    below_min_sim: list[str] = field(default_factory=list)
    sign_rule: list[str] = field(default_factory=list)
    no_causal_path: list[str] = field(default_factory=list)
    truncated_paths: list[str] = field(default_factory=list)

    @property
    def intermediates(self) -> list[str]:
        return [v for v in self.sub_graph.vertices
                if v != self.target and v not in self.root_causes]

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "root_causes": [{"metric": m, **s.to_dict()} for m, s in self.root_causes.items()],
            "intermediates": self.intermediates,
            "filtered": {
                "below_min_sim": list(self.below_min_sim),
                "sign_rule": list(self.sign_rule),
                "no_causal_path": list(self.no_causal_path),
            },
            "graph": self.sub_graph.to_dict(),
            "window": None if self.window is None else {"start": self.window.start, "end": self.window.end},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RootCauseReport":
        roots = {}
        for item in d["root_causes"]:
            item = dict(item)
            name = item.pop("metric")
            roots[name] = AdjustedScore(**item)
        w = d.get("window")
        f = d.get("filtered", {})
        return cls(d["target"], roots, CausalGraph.from_dict(d["graph"]),
                   None if w is None else AnomalyWindow(w["start"], w["end"]),
                   list(f.get("below_min_sim", [])), list(f.get("sign_rule", [])),
                   list(f.get("no_causal_path", [])))

    def to_dot(self) -> str:
        """DOT with root causes and target drawn solid, intermediates dashed."""
        styles = {}
        for v in self.sub_graph.vertices:
            if v == self.target:
                styles[v] = 'shape=doubleoctagon, style="solid,bold"'
            elif v in self.root_causes:
                styles[v] = 'shape=box, style=solid'
            else:
                styles[v] = 'shape=box, style=dashed'
        return self.sub_graph.to_dot("root_cause_subgraph", styles)


def order_candidates(rc: Mapping[str, AdjustedScore], pk: PartialGraphKnowledge) -> list[str]:
    return sorted(rc, key=lambda m: (-pk.level(m), -rc[m].score, m))


def select_path(g: CausalGraph, r: str, target: str, rc_set,
                limit: int = DEFAULT_PATH_LIMIT) -> tuple[tuple[str, ...] | None, bool]:
    """Preferred path from ``r`` to ``target`` and whether enumeration was truncated."""
    if r == target:
        raise ValueError("candidate equals the target")
    search = g.enumerate_paths(r, target, limit)
    if search.truncated:
        log.warning("path enumeration %s -> %s truncated at %d paths", r, target, limit)
    if not search.paths:
        return None, search.truncated
    rc_set = set(rc_set)
    # enumeration order is lexicographic, so min() keeps the smallest sequence on ties
    best = min(search.paths, key=lambda p: (-sum(v in rc_set for v in p), len(p)))
    return best, search.truncated


def subtract(g_dw: CausalGraph, rc: Mapping[str, AdjustedScore], target: str,
             pk: PartialGraphKnowledge | None = None, closure: bool = True,
             limit: int = DEFAULT_PATH_LIMIT) -> RootCauseReport:
    pk = pk or PartialGraphKnowledge()
    if target not in g_dw:
        raise ValueError(f"target {target!r} not in graph")
    order = order_candidates(rc, pk)
    rc_set = set(rc)
    keep_v: set[str] = {target}
    keep_e: set[tuple[str, str, int]] = set()
    roots: dict[str, AdjustedScore] = {}
    dropped, truncated = [], []
    for r in order:
        if r == target or r not in g_dw:
            dropped.append(r)
            continue
        path, trunc = select_path(g_dw, r, target, rc_set, limit)
        if trunc:
            truncated.append(r)
        if path is None:
            dropped.append(r)
            continue
        roots[r] = rc[r]
        keep_v.update(path)
        for a, b in zip(path, path[1:]):
            keep_e.update(e for e in g_dw.directed_edges if e[0] == a and e[1] == b)
    if closure:
        keep_e.update(e for e in g_dw.directed_edges if e[0] in keep_v and e[1] in keep_v)
    sub = CausalGraph([v for v in g_dw.vertices if v in keep_v])
    for u, v, lag in sorted(keep_e):
        sub.add_directed(u, v, lag)
    return RootCauseReport(target, roots, sub, no_causal_path=dropped, truncated_paths=truncated)
