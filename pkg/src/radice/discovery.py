"""Constraint-based causal discovery for multivariate time series.

A PCMCI+-style procedure:

1. **Lagged screening.**  For each variable, lagged candidate parents
   ``(i, tau)`` with ``1 <= tau <= tau_max`` are pruned by conditional
   independence tests that condition on the currently strongest other
   candidates, with the conditioning size growing by one per round.
2. **Skeleton.**  Contemporaneous pairs and the surviving lagged links are
   re-tested conditioning on the lagged parents of both endpoints plus growing
   subsets of contemporaneous neighbours.  Separating sets are recorded.
3. **Orientation.**  Unshielded colliders, then Meek rules 1-3.  Conflicting
   orientations leave the edge undirected; lagged edges are always directed
   forward in time.  With the default ``"majority"`` collider rule every
   unshielded triple is re-tested over the conditioning sets of the skeleton
   stage; the middle node is a collider when it appears in fewer than half of
   the separating sets found, a non-collider when it appears in more, and
   ambiguous otherwise.  Ambiguous triples orient nothing, including through
   the Meek rules.  ``"standard"`` uses the single separating set recorded by
   the skeleton stage.

The significance level is picked from a grid by the total BIC of per-variable
least-squares fits on the discovered parents.

Variables are referred to by ``(index, lag)`` pairs: ``(i, tau)`` is series
``i`` at time ``t - tau``.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import special, stats

from .dataset import DiagnosticInput, TimeSeriesDataset
from .graph import CausalGraph

log = logging.getLogger(__name__)

Node = tuple[int, int]

DEFAULT_ALPHAS = (0.01, 0.02, 0.05, 0.1, 0.2)


class DiscoveryError(ValueError):
    pass


class InsufficientSamplesError(DiscoveryError):
    pass


@dataclass(frozen=True)
class DiscoveryConfig:
    """Discovery settings.

    ``alpha`` fixes the significance level and skips the grid search.
    ``ci_test`` is ``"robust_parcorr"`` (normal scores, the default) or
    ``"parcorr"`` (raw values).  ``collider_rule`` is ``"majority"`` or
    ``"standard"``.
    """

    tau_max: int = 1
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHAS
    alpha: float | None = None
    ci_test: str = "robust_parcorr"
    max_conds_contemp: int = 3
    max_combinations: int = 10
    collider_rule: str = "majority"

    def __post_init__(self):
        if self.tau_max < 0:
            raise ValueError("tau_max must be >= 0")
        alphas = tuple(self.alpha_grid) if self.alpha is None else (self.alpha,)
        if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
            raise ValueError("significance levels must lie in (0, 1)")
        if self.ci_test not in ("robust_parcorr", "parcorr"):
            raise ValueError(f"unknown ci_test {self.ci_test!r}")
        if self.collider_rule not in ("majority", "standard"):
            raise ValueError(f"unknown collider_rule {self.collider_rule!r}")
        if self.max_conds_contemp < 0 or self.max_combinations < 1:
            raise ValueError("invalid conditioning limits")
        object.__setattr__(self, "alpha_grid", tuple(sorted(self.alpha_grid)))

    @property
    def alphas(self) -> tuple[float, ...]:
        return (self.alpha,) if self.alpha is not None else self.alpha_grid


@dataclass(frozen=True)
class CITestResult:
    statistic: float
    p_value: float
    conditioning_set: tuple[Node, ...]
    singular: bool = False


def normal_scores(x: np.ndarray) -> np.ndarray:
    """Inverse-normal transform of average ranks."""
    r = stats.rankdata(x)
    return special.ndtri((r - 0.5) / len(x))


class PartialCorrelation:
    """Partial correlation tests on lag-aligned data.

    All lagged copies up to ``max_lag`` are aligned once on a common window
    of ``T - max_lag`` samples and their correlation matrix is cached, so a
    test reduces to inverting a small sub-matrix.  Results are memoised.
    """

    def __init__(self, values: np.ndarray, max_lag: int, robust: bool = True):
        values = np.asarray(values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be (N, T)")
        n_vars, length = values.shape
        self.n_vars, self.max_lag = n_vars, max_lag
        self.n = length - max_lag
        if self.n < 4:
            raise InsufficientSamplesError(f"only {self.n} lag-aligned samples")
        data = np.array([normal_scores(v) for v in values]) if robust else values
        cols = np.empty((self.n, n_vars * (max_lag + 1)))
        for i in range(n_vars):
            for lag in range(max_lag + 1):
                cols[:, self._col((i, lag))] = data[i, max_lag - lag: length - lag]
        cols -= cols.mean(axis=0)
        sd = np.sqrt(np.mean(cols * cols, axis=0))
        self.constant = sd == 0
        sd[self.constant] = 1.0
        self.columns = cols / sd
        self.corr = self.columns.T @ self.columns / self.n
        self._cache: dict = {}

    def _col(self, node: Node) -> int:
        i, lag = node
        if not (0 <= i < self.n_vars and 0 <= lag <= self.max_lag):
            raise ValueError(f"variable {node} outside the aligned data (max lag {self.max_lag})")
        return i * (self.max_lag + 1) + lag

    def __call__(self, x: Node, y: Node, z: Iterable[Node] = ()) -> CITestResult:
        z = tuple(sorted(set(z) - {x, y}))
        a, b = (x, y) if x <= y else (y, x)
        key = (a, b, z)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        df = self.n - 2 - len(z)
        if df < 1:
            raise InsufficientSamplesError(
                f"{self.n} samples cannot support a test with {len(z)} conditions")
        idx = [self._col(a), self._col(b)] + [self._col(v) for v in z]
        singular = False
        if self.constant[idx[0]] or self.constant[idx[1]]:
            r = 0.0
        elif not z:
            r = float(self.corr[idx[0], idx[1]])
        else:
            sub = self.corr[np.ix_(idx, idx)]
            try:
                prec = np.linalg.inv(sub)
                if not np.all(np.isfinite(prec)):
                    raise np.linalg.LinAlgError
            except np.linalg.LinAlgError:
                prec = np.linalg.pinv(sub)
                singular = True
            denom = prec[0, 0] * prec[1, 1]
            r = float(-prec[0, 1] / math.sqrt(denom)) if denom > 0 else 0.0
        r = min(1.0, max(-1.0, r))
        if abs(r) >= 1.0:
            stat, p = math.copysign(math.inf, r), 0.0
        else:
            stat = r * math.sqrt(df / (1.0 - r * r))
            p = float(2.0 * special.stdtr(df, -abs(stat)))
        res = CITestResult(r, min(1.0, max(0.0, p)), z, singular)
        self._cache[key] = res
        return res

    def testable(self, z: Iterable[Node]) -> bool:
        """Whether enough samples remain for a test with conditioning set ``z``."""
        return self.n - 2 - len(set(z)) >= 1


def ci_test(dataset: TimeSeriesDataset | DiagnosticInput | np.ndarray, x, y, z=(),
            robust: bool = True) -> CITestResult:
    """Partial-correlation test of ``x`` and ``y`` given ``z``.

    Variables are ``(metric, lag)`` pairs where ``metric`` is a name (for
    datasets) or a row index.  The statistic is the partial correlation.
    """
    if isinstance(dataset, DiagnosticInput):
        dataset = dataset.dataset
    if isinstance(dataset, TimeSeriesDataset):
        names = dataset.metric_names
        values = dataset.values

        def resolve(node):
            m, lag = node
            return (names.index(m) if isinstance(m, str) else int(m), int(lag))
    else:
        values = np.asarray(dataset, dtype=float)

        def resolve(node):
            return (int(node[0]), int(node[1]))

    x, y = resolve(x), resolve(y)
    z = [resolve(v) for v in z]
    max_lag = max([x[1], y[1]] + [v[1] for v in z])
    if values.shape[1] - max_lag < len(z) + 3:
        raise InsufficientSamplesError("too few samples for the conditioning set")
    return PartialCorrelation(values, max_lag, robust)(x, y, z)


# --------------------------------------------------------------------------- #
# discovery stages


@dataclass
class _Skeleton:
    """Working state for one significance level."""

    lagged: dict[int, list[Node]]                 # j -> surviving lagged parents (by strength)
    adj0: dict[int, set[int]]                     # contemporaneous adjacency
    screened: dict[int, list[Node]]               # lagged parents from the screening stage
    sepsets: dict[tuple, set[Node]] = field(default_factory=dict)
    strength: dict[tuple, float] = field(default_factory=dict)


def _lagged_key(i: int, tau: int, j: int) -> tuple:
    return ("lag", i, tau, j)


def _contemp_key(i: int, j: int) -> tuple:
    return ("con", min(i, j), max(i, j))


def _lagged_conds(parents: dict[int, list[Node]], max_lag: int, node: Node, j: int) -> list[Node]:
    """Lagged parents of ``j`` plus those of ``node``, shifted to its lag."""
    i, tau = node
    out = set(p for p in parents[j] if p != node)
    for k, lag in parents[i]:
        if lag + tau <= max_lag:
            out.add((k, lag + tau))
    out.discard(node)
    return sorted(out)


def _screen_lagged(test: PartialCorrelation, n_vars: int, tau_max: int,
                   alpha: float) -> tuple[dict[int, list[Node]], dict[tuple, set[Node]]]:
    """PC1-style lagged parent screening with one condition set per round."""
    parents: dict[int, list[Node]] = {}
    sepsets: dict[tuple, set[Node]] = {}
    for j in range(n_vars):
        target = (j, 0)
        cands = [(i, tau) for tau in range(1, tau_max + 1) for i in range(n_vars)]
        min_stat = {c: math.inf for c in cands}
        p = 0
        while cands and p <= len(cands) - 1:
            removed = []
            for c in cands:
                conds = [o for o in cands if o != c][:p]
                if not test.testable(conds):
                    continue  # too few samples: keep the candidate
                res = test(c, target, conds)
                min_stat[c] = min(min_stat[c], abs(res.statistic))
                if res.p_value > alpha:
                    removed.append(c)
                    sepsets[_lagged_key(c[0], c[1], j)] = set(conds)
            cands = [c for c in cands if c not in removed]
            cands.sort(key=lambda c: (-min_stat[c], c))
            p += 1
        parents[j] = cands
    return parents, sepsets


def _skeleton(test: PartialCorrelation, n_vars: int, tau_max: int, alpha: float,
              parents: dict[int, list[Node]], sepsets: dict[tuple, set[Node]],
              config: DiscoveryConfig) -> _Skeleton:
    sk = _Skeleton(lagged={j: list(ps) for j, ps in parents.items()},
                   adj0={j: {i for i in range(n_vars) if i != j} for j in range(n_vars)},
                   screened=parents, sepsets=dict(sepsets))

    def lagged_conds_contemp(i: int, j: int) -> list[Node]:
        return _lagged_conds(parents, test.max_lag, (i, 0), j)

    def lagged_conds_lagged(i: int, tau: int, j: int) -> list[Node]:
        return _lagged_conds(parents, test.max_lag, (i, tau), j)

    for depth in range(config.max_conds_contemp + 1):
        adj_snapshot = {j: sorted(s, key=lambda k: (-sk.strength.get(_contemp_key(j, k), math.inf), k))
                        for j, s in sk.adj0.items()}
        any_tested = False
        # contemporaneous pairs
        for i in range(n_vars):
            for j in range(i + 1, n_vars):
                if j not in sk.adj0[i]:
                    continue
                pool: list[tuple[int, ...]] = []
                for side, other in ((j, i), (i, j)):
                    nbrs = [k for k in adj_snapshot[side] if k != other]
                    if len(nbrs) >= depth:
                        for s in itertools.islice(itertools.combinations(nbrs, depth),
                                                  config.max_combinations):
                            if tuple(sorted(s)) not in pool:
                                pool.append(tuple(sorted(s)))
                if not pool:
                    continue
                any_tested = True
                base = lagged_conds_contemp(i, j)
                key = _contemp_key(i, j)
                for s in pool:
                    conds = base + [(k, 0) for k in s]
                    if not test.testable(conds):
                        continue
                    res = test((i, 0), (j, 0), conds)
                    sk.strength[key] = min(sk.strength.get(key, math.inf), abs(res.statistic))
                    if res.p_value > alpha:
                        sk.adj0[i].discard(j)
                        sk.adj0[j].discard(i)
                        sk.sepsets[key] = set(conds)
                        break
        # lagged links, re-tested with contemporaneous conditions
        for j in range(n_vars):
            nbrs = adj_snapshot[j]
            if len(nbrs) < depth:
                continue
            for (i, tau) in list(sk.lagged[j]):
                any_tested = True
                base = lagged_conds_lagged(i, tau, j)
                key = _lagged_key(i, tau, j)
                for s in itertools.islice(itertools.combinations(nbrs, depth), config.max_combinations):
                    conds = base + [(k, 0) for k in s]
                    if not test.testable(conds):
                        continue
                    res = test((i, tau), (j, 0), conds)
                    sk.strength[key] = min(sk.strength.get(key, math.inf), abs(res.statistic))
                    if res.p_value > alpha:
                        sk.lagged[j].remove((i, tau))
                        sk.sepsets[key] = set(conds)
                        break
        if not any_tested:
            break
    return sk


class _Orientation:
    """Contemporaneous edge marks: undirected, or a single arrowhead."""

    def __init__(self, sk: _Skeleton, n_vars: int):
        self.sk = sk
        self.n_vars = n_vars
        self.directed: set[tuple[int, int]] = set()   # (a, b): a -> b at lag 0
        self.undirected: set[tuple[int, int]] = {
            (i, j) for i in range(n_vars) for j in sk.adj0[i] if i < j}
        # unshielded triples (node, k, j) whose collider status is undecided
        self.ambiguous: set[tuple[Node, int, int]] = set()

    def adjacent0(self, a: int, b: int) -> bool:
        return b in self.sk.adj0[a]

    def is_undirected(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.undirected

    def _reaches(self, src: int, dst: int) -> bool:
        stack, seen = [src], {src}
        while stack:
            x = stack.pop()
            if x == dst:
                return True
            for a, b in self.directed:
                if a == x and b not in seen:
                    seen.add(b)
                    stack.append(b)
        return False

    def orient(self, a: int, b: int) -> bool:
        """Turn undirected ``a - b`` into ``a -> b`` unless that closes a cycle."""
        if not self.is_undirected(a, b) or self._reaches(b, a):
            return False
        self.undirected.discard((min(a, b), max(a, b)))
        self.directed.add((a, b))
        return True

    def parents_into(self, b: int) -> list[Node]:
        """Directed parents of ``b``: lagged links and oriented contemporaneous edges."""
        out = list(self.sk.lagged[b])
        out += [(a, 0) for a, bb in sorted(self.directed) if bb == b]
        return out

    def node_adjacent(self, node: Node, c: int) -> bool:
        a, tau = node
        if tau == 0:
            return a != c and self.adjacent0(a, c)
        return node in self.sk.lagged[c]


def _sepset(sk: _Skeleton, node: Node, j: int) -> set[Node] | None:
    i, tau = node
    key = _contemp_key(i, j) if tau == 0 else _lagged_key(i, tau, j)
    return sk.sepsets.get(key)


def _unshielded_triples(o: _Orientation):
    """Yield ``(node, k, j)``: ``node`` adjacent to ``k(t)``, ``k(t) - j(t)``, ``node`` not adjacent to ``j(t)``."""
    sk = o.sk
    for k in range(o.n_vars):
        contemp = sorted(sk.adj0[k])
        for j in contemp:
            others: list[Node] = [(i, 0) for i in contemp if i != j] + list(sk.lagged[k])
            for node in others:
                if not o.node_adjacent(node, j):
                    yield node, k, j


def _majority_vote(test: PartialCorrelation, o: _Orientation, node: Node, k: int, j: int,
                   alpha: float, config: DiscoveryConfig) -> str:
    """``"collider"``, ``"non-collider"`` or ``"ambiguous"`` for one unshielded triple."""
    sk = o.sk
    base = _lagged_conds(sk.screened, test.max_lag, node, j)
    pools = [[m for m in sorted(sk.adj0[j]) if (m, 0) != node]]
    if node[1] == 0:
        pools.append([m for m in sorted(sk.adj0[node[0]]) if m != j])
    subsets: list[tuple[int, ...]] = []
    for nbrs in pools:
        for depth in range(min(len(nbrs), config.max_conds_contemp) + 1):
            for s in itertools.islice(itertools.combinations(nbrs, depth), config.max_combinations):
                if s not in subsets:
                    subsets.append(s)
    found = with_k = 0
    for s in subsets:
        conds = base + [(m, 0) for m in s]
        if not test.testable(conds):
            continue
        res = test(node, (j, 0), conds)
        if res.p_value > alpha:
            found += 1
            with_k += k in s
    if found == 0 or 2 * with_k == found:
        return "ambiguous"
    return "collider" if 2 * with_k < found else "non-collider"


def _orient_colliders(o: _Orientation, test: PartialCorrelation | None = None,
                      alpha: float = 0.05, config: DiscoveryConfig | None = None) -> None:
    """Orient unshielded colliders; with ``test`` given, decide them by majority vote."""
    sk = o.sk
    heads: dict[tuple[int, int], set[int]] = {}
    for node, k, j in _unshielded_triples(o):
        if test is not None and config is not None and config.collider_rule == "majority":
            verdict = _majority_vote(test, o, node, k, j, alpha, config)
            if verdict == "ambiguous":
                o.ambiguous.add((node, k, j))
            if verdict != "collider":
                continue
        else:
            sep = _sepset(sk, node, j)
            if sep is None or (k, 0) in sep:
                continue
        heads.setdefault((min(j, k), max(j, k)), set()).add(k)
        if node[1] == 0:
            i = node[0]
            heads.setdefault((min(i, k), max(i, k)), set()).add(k)
    for (a, b), hs in sorted(heads.items()):
        if len(hs) != 1:
            continue  # conflicting colliders: leave undirected
        head = next(iter(hs))
        tail = a if head == b else b
        o.orient(tail, head)


def _apply_meek(o: _Orientation) -> None:
    changed = True
    while changed:
        changed = False
        for a, b in sorted(o.undirected):
            for x, y in ((a, b), (b, a)):
                if not o.is_undirected(x, y):
                    break
                # R1: p -> x - y with p not adjacent to y
                if any(not o.node_adjacent(p, y) and p != (y, 0) and (p, x, y) not in o.ambiguous
                       for p in o.parents_into(x)):
                    changed |= o.orient(x, y)
                    continue
                # R2: x -> m -> y with x - y
                if any((x, m) in o.directed and (m, y) in o.directed for m in range(o.n_vars)):
                    changed |= o.orient(x, y)
                    continue
                # R3: x - c -> y and x - d -> y with c, d non-adjacent
                cs = [c for c in range(o.n_vars) if o.is_undirected(x, c) and (c, y) in o.directed]
                if any(not o.adjacent0(c, d) and ((c, 0), y, d) not in o.ambiguous
                       and ((d, 0), y, c) not in o.ambiguous
                       for c, d in itertools.combinations(cs, 2)):
                    changed |= o.orient(x, y)


def _to_graph(o: _Orientation, names: Sequence[str]) -> CausalGraph:
    g = CausalGraph(names)
    for j in range(o.n_vars):
        for i, tau in o.sk.lagged[j]:
            g.add_directed(names[i], names[j], tau)
    for a, b in sorted(o.directed):
        g.add_directed(names[a], names[b], 0)
    for a, b in sorted(o.undirected):
        g.add_undirected(names[a], names[b])
    return g


def _bic(columns: np.ndarray, n_vars: int, max_lag: int, o: _Orientation) -> float:
    n = columns.shape[0]
    total = 0.0
    for j in range(n_vars):
        par = list(o.parents_into(j)) + [(a, 0) for a, b in sorted(o.undirected) if b == j]
        y = columns[:, j * (max_lag + 1)]
        if par:
            X = np.column_stack([np.ones(n)] + [columns[:, i * (max_lag + 1) + lag] for i, lag in par])
            beta, *_ = np.linalg.lstsq(X, y, rcond=None)
            resid = y - X @ beta
        else:
            resid = y - y.mean()
        rss = max(float(resid @ resid), 1e-300)
        total += n * math.log(rss / n) + (len(par) + 1) * math.log(n)
    return total


@dataclass
class DiscoveryResult:
    graph: CausalGraph
    alpha: float
    scores: dict[float, float]
    low_sample_warning: bool = False


def discover_detailed(data: DiagnosticInput | TimeSeriesDataset,
                      config: DiscoveryConfig | None = None) -> DiscoveryResult:
    config = config or DiscoveryConfig()
    ds = data.dataset if isinstance(data, DiagnosticInput) else data
    names, values = ds.metric_names, ds.values
    n_vars, length = values.shape
    tau_max = config.tau_max
    low = length < 10 * (tau_max + 1)
    if low:
        log.warning("only %d samples for tau_max=%d; results may be unreliable", length, tau_max)
    # lagged conditions of lagged links reach back 2 * tau_max
    test = PartialCorrelation(values, 2 * tau_max, robust=config.ci_test == "robust_parcorr")

    results = {}
    for alpha in config.alphas:
        parents, sepsets = _screen_lagged(test, n_vars, tau_max, alpha)
        sk = _skeleton(test, n_vars, tau_max, alpha, parents, sepsets, config)
        o = _Orientation(sk, n_vars)
        _orient_colliders(o, test, alpha, config)
        _apply_meek(o)
        score = _bic(test.columns, n_vars, test.max_lag, o) if len(config.alphas) > 1 else 0.0
        results[alpha] = (score, o)
    best = min(results, key=lambda a: (results[a][0], a))
    graph = _to_graph(results[best][1], names)
    return DiscoveryResult(graph, best, {a: s for a, (s, _) in results.items()}, low)


def discover(data: DiagnosticInput | TimeSeriesDataset, config: DiscoveryConfig | None = None) -> CausalGraph:
    """Causal graph over all metrics; see the module docstring for the stages."""
    return discover_detailed(data, config).graph
