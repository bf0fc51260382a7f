"""Expert knowledge about the monitored system.

Two parts:

* partial graph knowledge: instantaneous domain edges plus a level for each
  metric.  A metric can only be caused by metrics of the same or lower level.
* refinement knowledge: the correlation sign a metric must show against the
  performance metric to stay a candidate root cause.

JSON layout (all sections optional)::

    {"levels": {"a": 1, "b": 2}, "edges": [["a", "b"]], "rules": {"a": "negative"}}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

NEUTRAL_LEVEL = 0
SIGNS = ("positive", "negative")


class KnowledgeError(ValueError):
    pass


@dataclass(frozen=True)
class PartialGraphKnowledge:
    domain_edges: frozenset[tuple[str, str]] = frozenset()
    levels: Mapping[str, int] = field(default_factory=dict)
    default_level: int = NEUTRAL_LEVEL

    def __post_init__(self):
        object.__setattr__(self, "domain_edges", frozenset((str(u), str(v)) for u, v in self.domain_edges))
        object.__setattr__(self, "levels", {str(k): int(v) for k, v in dict(self.levels).items()})
        self.validate()

    def level(self, metric: str) -> int:
        return self.levels.get(metric, self.default_level)

    def validate(self) -> None:
        for u, v in self.domain_edges:
            if u == v:
                raise KnowledgeError(f"domain edges create a cycle: self-loop on {u!r}")
        if _has_cycle(self.domain_edges):
            raise KnowledgeError("domain edges create a cycle")
        for u, v in sorted(self.domain_edges):
            if self.level(u) > self.level(v):
                raise KnowledgeError(
                    f"edge contradicts levels: {u!r} (level {self.level(u)}) -> "
                    f"{v!r} (level {self.level(v)})")

    @property
    def metrics(self) -> set[str]:
        out = set(self.levels)
        for u, v in self.domain_edges:
            out.update((u, v))
        return out


@dataclass(frozen=True)
class RefinementKnowledge:
    sign_rules: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        rules = {str(k): str(v).lower() for k, v in dict(self.sign_rules).items()}
        bad = {k: v for k, v in rules.items() if v not in SIGNS}
        if bad:
            raise KnowledgeError(f"sign rules must be 'positive' or 'negative': {bad}")
        object.__setattr__(self, "sign_rules", rules)


@dataclass(frozen=True)
class DomainKnowledgeModel:
    partial: PartialGraphKnowledge = field(default_factory=PartialGraphKnowledge)
    refinement: RefinementKnowledge = field(default_factory=RefinementKnowledge)

    @classmethod
    def empty(cls) -> "DomainKnowledgeModel":
        return cls()

    @property
    def is_empty(self) -> bool:
        return not (self.partial.domain_edges or self.partial.levels or self.refinement.sign_rules)

    def validate_metrics(self, universe: Iterable[str]) -> None:
        """Reject knowledge that mentions metrics absent from the data."""
        universe = set(universe)
        unknown = sorted((self.partial.metrics | set(self.refinement.sign_rules)) - universe)
        if unknown:
            raise KnowledgeError(f"unknown metric(s) in domain knowledge: {unknown}")

    def to_dict(self) -> dict:
        return {
            "levels": dict(sorted(self.partial.levels.items())),
            "edges": [list(e) for e in sorted(self.partial.domain_edges)],
            "rules": dict(sorted(self.refinement.sign_rules.items())),
        }

    @classmethod
    def from_dict(cls, d: Mapping, universe: Iterable[str] | None = None) -> "DomainKnowledgeModel":
        if not isinstance(d, Mapping):
            raise KnowledgeError("domain knowledge must be a JSON object")
        try:
            edges = [(u, v) for u, v in d.get("edges", []) or []]
        except (TypeError, ValueError):
            raise KnowledgeError("edges must be a list of [from, to] pairs") from None
        model = cls(PartialGraphKnowledge(frozenset(edges), d.get("levels", {}) or {}),
                    RefinementKnowledge(d.get("rules", {}) or {}))
        if universe is not None:
            model.validate_metrics(universe)
        return model


def load_dk(path: str | Path, universe: Iterable[str] | None = None) -> DomainKnowledgeModel:
    """Load and validate a domain knowledge JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        return DomainKnowledgeModel.empty()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KnowledgeError(f"{path}: malformed JSON ({exc})") from exc
    return DomainKnowledgeModel.from_dict(doc, universe)


def level_of(model: DomainKnowledgeModel, metric: str) -> int:
    return model.partial.level(metric)


def sign_permits(model: DomainKnowledgeModel, metric: str, corr: float) -> bool:
    """Whether ``corr`` has the sign required for ``metric`` (no rule: always)."""
    rule = model.refinement.sign_rules.get(metric)
    if rule is None:
        return True
    return corr > 0 if rule == "positive" else corr < 0


def _has_cycle(edges: Iterable[tuple[str, str]]) -> bool:
    succ: dict[str, list[str]] = {}
    for u, v in edges:
        succ.setdefault(u, []).append(v)
    state: dict[str, int] = {}
    for root in sorted(succ):
        if state.get(root):
            continue
        stack = [(root, iter(succ.get(root, ())))]
        state[root] = 1
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[node] = 2
                stack.pop()
            elif state.get(nxt) == 1:
                return True
            elif not state.get(nxt):
                state[nxt] = 1
                stack.append((nxt, iter(succ.get(nxt, ()))))
    return False
