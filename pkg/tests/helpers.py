"""Shared builders for the tests."""
from __future__ import annotations

import numpy as np

from radice.graph import CausalGraph

# root X2 reaches the performance metric X7 through X4 and X5; X3, X6 and X8
# are affected but have no path to X7; X0 and X1 are unaffected
PIPELINE_EDGES = [
    ("X0", "X1", 0), ("X1", "X7", 0), ("X2", "X3", 0), ("X2", "X4", 0), ("X4", "X5", 1),
    ("X4", "X6", 0), ("X5", "X7", 0), ("X5", "X8", 0),
]


def pipeline_graph() -> CausalGraph:
    return CausalGraph([f"X{i}" for i in range(9)], PIPELINE_EDGES)


def random_dag(rng: np.random.Generator, n: int, p: float = 0.3, lag1: float = 0.2,
               prefix: str = "v") -> CausalGraph:
    """Random graph whose edges follow a random vertex order (lags drawn per edge)."""
    names = [f"{prefix}{i}" for i in range(n)]
    order = list(rng.permutation(n))
    g = CausalGraph(names)
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < p:
                g.add_directed(names[order[a]], names[order[b]], int(rng.random() < lag1))
    return g


def random_knowledge_instance(rng: np.random.Generator, length: int = 60):
    """Random (discovered graph, partial knowledge, input) triple for enhancement tests.

    The discovered graph mixes lag-0/lag-1 directed and undirected edges with
    no regard for the levels; the domain edges follow a hidden order and the
    levels, so the knowledge itself is valid.
    """
    from radice.dataset import DiagnosticInput, TimeSeriesDataset
    from radice.domain_knowledge import PartialGraphKnowledge

    n = int(rng.integers(3, 11))
    names = [f"m{i}" for i in range(n)]
    g = CausalGraph(names)
    disc_order = list(rng.permutation(n))
    for a in range(n):
        for b in range(a + 1, n):
            u, v = names[disc_order[a]], names[disc_order[b]]
            r = rng.random()
            if r < 0.2:
                g.add_directed(u, v, 0)
            elif r < 0.35:
                g.add_undirected(u, v)
            elif r < 0.45:
                g.add_directed(v, u, 1)
    level_values = rng.integers(1, 4, n)
    levels = {m: int(level_values[k]) for k, m in enumerate(names) if rng.random() < 0.8}
    lv = lambda m: levels.get(m, 0)  # noqa: E731
    hidden = sorted(names, key=lambda m: (lv(m), rng.random()))
    edges = set()
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.15 and lv(hidden[a]) <= lv(hidden[b]):
                edges.add((hidden[a], hidden[b]))
    pk = PartialGraphKnowledge(frozenset(edges), levels)
    values = rng.standard_normal((n, length))
    # a few genuinely coupled pairs so entropy orientation sometimes fires
    for u, v in g.undirected_edges[:2]:
        values[names.index(v)] += np.round(values[names.index(u)] * 2) / 2
    inp = DiagnosticInput(TimeSeriesDataset(tuple(names), values), names[0])
    return g, pk, inp, hidden


def planted_channel(pu, maps, noise) -> np.ndarray:
    """Joint table of (u, v) with ``v = maps[e][u]`` and ``e ~ noise``."""
    joint = np.zeros((len(pu), 4))
    for f, pe in zip(maps, noise):
        for i, p in enumerate(pu):
            joint[i, f[i]] += p * pe
    return joint / joint.sum()


def channel_fixtures(count: int = 80, seed: int = 2024) -> list[np.ndarray]:
    """4x4 joint tables with u -> v planted through low-entropy noise.

    Three quarters use binary noise, the rest ternary; the first entry is the
    hand-written many-to-one channel with a 5 % flip.  Channels whose exact
    coupling search would need more than 200k bases are skipped.
    """
    from oracles import n_bases

    def tractable(joint):
        rows = [r / r.sum() for r in joint if r.sum() > 0]
        cols = [c / c.sum() for c in joint.T if c.sum() > 0]
        return max(n_bases(rows), n_bases(cols)) <= 200_000

    rng = np.random.default_rng(seed)
    out = [planted_channel(np.ones(4), ([0, 0, 0, 1], [3, 3, 3, 3]), (0.95, 0.05))]
    while len(out) < count:
        pu = rng.integers(1, 6, 4).astype(float)
        base = rng.permutation(4) if rng.random() < 0.5 else rng.integers(0, 4, 4)
        if len(out) < 3 * count // 4:
            eps = float(rng.choice([0.05, 0.1, 0.2, 0.3]))
            maps, noise = (base, rng.integers(0, 4, 4)), (1 - eps, eps)
        else:
            e1, e2 = (float(a) for a in rng.choice([0.05, 0.1, 0.15], 2))
            maps, noise = (base, rng.integers(0, 4, 4), rng.integers(0, 4, 4)), (1 - e1 - e2, e1, e2)
        joint = planted_channel(pu, maps, noise)
        if tractable(joint):
            out.append(joint)
    return out
