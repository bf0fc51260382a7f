"""Adjusted correlation score and candidate root-cause filtering.

The score of a candidate against the performance metric is the best
``|corr| - penalty`` over a grid of smoothing widths and backward shifts of
the candidate, where wider smoothing and larger shifts cost a fixed penalty
per step.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DiagnosticInput, normalize, pearson, shift, smooth
from .domain_knowledge import DomainKnowledgeModel, sign_permits


@dataclass(frozen=True)
class RefinementConfig:
    max_shift: int = 1
    max_width: int = 2
    shift_penalty: float = 0.004
    smooth_penalty: float = 0.01
    min_sim: float = 0.5

    def __post_init__(self):
        if self.max_shift < 0:
            raise ValueError("max_shift must be >= 0")
        if self.max_width < 1:
            raise ValueError("max_width must be >= 1")
        if self.shift_penalty < 0 or self.smooth_penalty < 0:
            raise ValueError("penalties must be >= 0")
        if not 0.0 <= self.min_sim <= 1.0:
            raise ValueError("min_sim must lie in [0, 1]")

    @classmethod
    def pearson_only(cls, min_sim: float = 0.5) -> "RefinementConfig":
        """Single grid cell (no smoothing, no shift): plain |Pearson|."""
        return cls(max_shift=0, max_width=1, min_sim=min_sim)


@dataclass(frozen=True)
class AdjustedScore:
    score: float
    corr: float
    penalty: float
    width: int = 1
    shift: int = 0

    def to_dict(self) -> dict:
        return {"score": self.score, "corr": self.corr, "penalty": self.penalty,
                "width": self.width, "shift": self.shift}


def adjusted_score(x, c, config: RefinementConfig | None = None) -> AdjustedScore:
    """Best (score, corr, penalty) of candidate ``c`` against performance ``x``.

    Ties on score go to the smaller penalty, then to the smaller (width, shift).
    """
    config = config or RefinementConfig()
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    if x.shape != c.shape:
        raise ValueError("series lengths differ")
    if len(x) < config.max_width + config.max_shift + 2:
        raise ValueError(
            f"series of length {len(x)} too short for max_width={config.max_width}, "
            f"max_shift={config.max_shift}")
    xn, cn = normalize(x), normalize(c)
    best: AdjustedScore | None = None
    for w in range(1, config.max_width + 1):
        xs, cs = smooth(xn, w), smooth(cn, w)
        smooth_pen = config.smooth_penalty * (w - 1)
        for s in range(config.max_shift + 1):
            xa, ca = shift(cs, s).apply(xs, cs)
            penalty = smooth_pen + config.shift_penalty * s
            corr = pearson(xa, ca)
            cand = AdjustedScore(abs(corr) - penalty, corr, penalty, w, s)
            # grid is visited in increasing (w, s), so strict comparisons keep the smaller cell
            if (best is None or cand.score > best.score
                    or (cand.score == best.score and cand.penalty < best.penalty)):
                best = cand
    assert best is not None
    return best


@dataclass
class RefinementResult:
    """Candidates that survive refinement plus the ones filtered out, by reason."""

    root_causes: dict[str, AdjustedScore]
    scores: dict[str, AdjustedScore] = field(default_factory=dict)
    below_min_sim: list[str] = field(default_factory=list)
    sign_rule: list[str] = field(default_factory=list)


def refine(inp: DiagnosticInput, dk: DomainKnowledgeModel | None = None,
           config: RefinementConfig | None = None) -> RefinementResult:
    """Keep candidates scoring at least ``min_sim`` whose correlation sign obeys the rules."""
    config = config or RefinementConfig()
    dk = dk or DomainKnowledgeModel.empty()
    x = inp.target_series
    result = RefinementResult(root_causes={})
    for name in sorted(inp.candidates):
        sc = adjusted_score(x, inp.dataset.series(name), config)
        result.scores[name] = sc
        if sc.score < config.min_sim:
            result.below_min_sim.append(name)
        elif not sign_permits(dk, name, sc.corr):
            result.sign_rule.append(name)
        else:
            result.root_causes[name] = sc
    return result
