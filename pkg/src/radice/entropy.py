"""Entropic orientation of contemporaneous edges.

For a pair (u, v) both series are cut into equal-mass bins.  The cost of the
direction u -> v is ``H(u) + H(E)`` where ``E`` is the lowest-entropy
exogenous noise with ``v = f(u, E)``; ``H(E)`` is the entropy of a
minimum-entropy coupling of the conditionals ``P(v | u = i)``, approximated
greedily.  The cheaper direction wins, and the cost gap (in bits) is the
confidence.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .graph import CausalGraph

log = logging.getLogger(__name__)

FORWARD, BACKWARD, INCONCLUSIVE = "u->v", "v->u", "inconclusive"
_EPS = 1e-12


@dataclass(frozen=True)
class EntropyConfig:
    bins: int = 8
    min_gap: float = 0.05

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.min_gap < 0:
            raise ValueError("min_gap must be >= 0")


@dataclass(frozen=True)
class OrientationVerdict:
    direction: str
    score: float
    cost_forward: float = float("nan")
    cost_backward: float = float("nan")

    @property
    def conclusive(self) -> bool:
        return self.direction != INCONCLUSIVE


def entropy_bits(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > _EPS]
    return float(-(p * np.log2(p)).sum())


def greedy_coupling(marginals: Sequence[Sequence[float]]) -> np.ndarray:
    """Atom masses of the greedy minimum-entropy coupling.

    Repeatedly takes the smallest of the marginals' current maxima as the
    next joint atom and removes that mass from every marginal's maximum.
    """
    ps = [np.array(m, dtype=float) for m in marginals]
    if not ps:
        return np.array([1.0])
    atoms = []
    while True:
        tops = [int(np.argmax(p)) for p in ps]
        r = min(p[i] for p, i in zip(ps, tops))
        if r <= _EPS:
            break
        atoms.append(r)
        for p, i in zip(ps, tops):
            p[i] -= r
    return np.array(atoms)


def direction_cost(joint: np.ndarray, row_is_cause: bool = True) -> float:
    """``H(cause) + H(greedy coupling of P(effect | cause))`` in bits."""
    joint = np.asarray(joint, dtype=float)
    if not row_is_cause:
        joint = joint.T
    joint = joint / joint.sum()
    marg = joint.sum(axis=1)
    keep = marg > _EPS
    conditionals = joint[keep] / marg[keep, None]
    return entropy_bits(marg) + entropy_bits(greedy_coupling(conditionals))


def orient_joint(joint, config: EntropyConfig | None = None) -> OrientationVerdict:
    """Orientation verdict from a joint table with rows = u and columns = v."""
    config = config or EntropyConfig()
    joint = np.asarray(joint, dtype=float)
    fwd = direction_cost(joint, True)
    bwd = direction_cost(joint, False)
    score = abs(fwd - bwd)
    # an exact tie has no direction even when min_gap is zero
    if score < config.min_gap or score <= _EPS:
        return OrientationVerdict(INCONCLUSIVE, score, fwd, bwd)
    return OrientationVerdict(FORWARD if fwd < bwd else BACKWARD, score, fwd, bwd)


def quantile_bins(x, bins: int) -> np.ndarray:
    """Equal-mass bin index in ``[0, bins)`` for every sample.

    Bins follow average ranks, so tied values always share a bin.
    """
    x = np.asarray(x, dtype=float)
    ranks = stats.rankdata(x)
    return np.minimum(((ranks - 0.5) * bins / len(x)).astype(int), bins - 1)


def joint_table(u, v, bins: int) -> np.ndarray:
    bu, bv = quantile_bins(u, bins), quantile_bins(v, bins)
    table = np.zeros((bins, bins))
    np.add.at(table, (bu, bv), 1.0)
    return table / table.sum()


class InsufficientSamplesError(ValueError):
    pass


def orient_pair(u, v, config: EntropyConfig | None = None) -> OrientationVerdict:
    """Entropic orientation of two equally long series."""
    config = config or EntropyConfig()
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("series lengths differ")
    if len(u) < 3 * config.bins:
        raise InsufficientSamplesError(
            f"{len(u)} samples is fewer than 3 per bin for {config.bins} bins")
    table = joint_table(u, v, config.bins)
    if np.count_nonzero(table.sum(axis=1)) < 2 or np.count_nonzero(table.sum(axis=0)) < 2:
        return OrientationVerdict(INCONCLUSIVE, 0.0)
    return orient_joint(table, config)


@dataclass
class OrientationOutcome:
    inserted: list[tuple[str, str]]
    cycle_rejected: list[tuple[str, str]]
    inconclusive: list[tuple[str, str]]
    verdicts: dict[tuple[str, str], OrientationVerdict]


def entropy_orientation(pairs: Iterable[tuple[str, str]], graph: CausalGraph,
                        series: Mapping[str, np.ndarray] | Callable[[str], np.ndarray],
                        config: EntropyConfig | None = None) -> OrientationOutcome:
    """Orient ``pairs`` and insert them into ``graph`` (in place) by confidence.

    Conclusive verdicts are inserted in decreasing score order (ties by the
    oriented pair's names) as lag-0 edges; an edge that would close a lag-0
    cycle is dropped.
    """
    config = config or EntropyConfig()
    get = series if callable(series) else series.__getitem__
    canonical = sorted({(u, v) if u <= v else (v, u) for u, v in pairs})
    verdicts: dict[tuple[str, str], OrientationVerdict] = {}
    oriented: list[tuple[float, str, str]] = []
    inconclusive: list[tuple[str, str]] = []
    for u, v in canonical:
        try:
            verdict = orient_pair(get(u), get(v), config)
        except (ValueError, FloatingPointError) as exc:
            log.info("entropy orientation of %s-%s treated as inconclusive: %s", u, v, exc)
            verdict = OrientationVerdict(INCONCLUSIVE, 0.0)
        verdicts[(u, v)] = verdict
        if verdict.direction == FORWARD:
            oriented.append((verdict.score, u, v))
        elif verdict.direction == BACKWARD:
            oriented.append((verdict.score, v, u))
        else:
            inconclusive.append((u, v))
    oriented.sort(key=lambda e: (-e[0], e[1], e[2]))
    inserted, rejected = [], []
    for _, a, b in oriented:
        if graph.would_create_cycle(a, b):
            rejected.append((a, b))
            log.info("entropy orientation %s -> %s dropped: lag-0 cycle", a, b)
            continue
        graph.add_directed(a, b, 0)
        inserted.append((a, b))
    return OrientationOutcome(inserted, rejected, inconclusive, verdicts)
