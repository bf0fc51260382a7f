import numpy as np
import pytest

from helpers import channel_fixtures, planted_channel
from oracles import exact_coupling_entropy, exact_direction_cost
from radice.entropy import (BACKWARD, FORWARD, INCONCLUSIVE, EntropyConfig, InsufficientSamplesError,
                            direction_cost, entropy_bits, entropy_orientation, greedy_coupling, joint_table,
                            orient_joint, orient_pair, quantile_bins)
from radice.graph import CausalGraph


def test_greedy_coupling_small_cases():
    assert entropy_bits(greedy_coupling([[0.5, 0.5], [0.5, 0.5]])) == pytest.approx(1.0)
    # identical marginals couple onto the diagonal
    p = [0.6, 0.3, 0.1]
    assert entropy_bits(greedy_coupling([p, p, p])) == pytest.approx(entropy_bits(p))
    atoms = greedy_coupling([[0.7, 0.3], [0.4, 0.6]])
    assert atoms.sum() == pytest.approx(1.0)
    assert np.round(atoms, 12).tolist() == [0.6, 0.3, 0.1]


def test_exact_oracle_sanity():
    # the best coupling here puts 1/4, 1/4 and 1/2 on three cells
    assert exact_coupling_entropy([[0.5, 0.5], [0.25, 0.75]]) == pytest.approx(1.5)
    assert exact_coupling_entropy([[1.0, 0.0], [0.25, 0.75]]) == pytest.approx(entropy_bits([0.25, 0.75]))


def test_greedy_never_beats_exact():
    for joint in channel_fixtures()[:30]:
        for forward in (True, False):
            assert direction_cost(joint, forward) >= exact_direction_cost(joint, forward) - 1e-9


def test_flip_channel_orientation():
    joint = planted_channel(np.ones(4), ([0, 0, 0, 1], [3, 3, 3, 3]), (0.95, 0.05))
    exact_fwd, exact_bwd = exact_direction_cost(joint, True), exact_direction_cost(joint, False)
    assert (exact_fwd, exact_bwd) == pytest.approx((2.2864, 3.4534), abs=1e-4)
    verdict = orient_joint(joint)
    assert verdict.direction == FORWARD and verdict.score > 0.5


def test_identity_is_inconclusive():
    x = np.random.default_rng(0).standard_normal(80)
    v = orient_pair(x, x)
    assert v.direction == INCONCLUSIVE and v.score == pytest.approx(0.0, abs=1e-12)


def test_antisymmetry():
    rng = np.random.default_rng(1)
    for _ in range(50):
        u = rng.standard_normal(64)
        v = np.tanh(u) * rng.uniform(0, 2) + rng.standard_normal(64) * rng.uniform(0, 1)
        a, b = orient_pair(u, v, EntropyConfig(min_gap=0.0)), orient_pair(v, u, EntropyConfig(min_gap=0.0))
        assert a.score == b.score
        flip = {FORWARD: BACKWARD, BACKWARD: FORWARD, INCONCLUSIVE: INCONCLUSIVE}
        assert b.direction == flip[a.direction]


def test_inconclusive_iff_below_gap():
    rng = np.random.default_rng(2)
    for _ in range(30):
        u, v = rng.standard_normal((2, 48))
        verdict = orient_pair(u, v, EntropyConfig(min_gap=0.1))
        assert verdict.score >= 0
        assert (verdict.direction == INCONCLUSIVE) == (verdict.score < 0.1)
    tie = orient_joint(np.full((2, 2), 0.25), EntropyConfig(min_gap=0.0))
    assert tie.direction == INCONCLUSIVE


def test_input_checks():
    with pytest.raises(InsufficientSamplesError):
        orient_pair(np.arange(20.0), np.arange(20.0))
    with pytest.raises(ValueError):
        orient_pair(np.arange(30.0), np.arange(31.0))
    assert orient_pair(np.ones(30), np.arange(30.0)).direction == INCONCLUSIVE
    with pytest.raises(ValueError):
        EntropyConfig(bins=1)


def test_quantile_bins_keep_ties_together():
    x = np.repeat([0.0, 1.0, 2.0, 3.0], 10)
    assert np.bincount(quantile_bins(x, 4)).tolist() == [10, 10, 10, 10]
    assert np.bincount(quantile_bins(np.arange(16.0), 8)).tolist() == [2] * 8
    assert joint_table(x, x, 4).trace() == pytest.approx(1.0)


def test_null_scores_stay_small():
    scores = [orient_pair(*np.random.default_rng(s).standard_normal((2, 2000))).score for s in range(100)]
    assert np.quantile(scores, 0.9) < 0.25


@pytest.mark.xfail(reason="with 8 equal-mass bins the greedy coupling of empirical rows and columns differs "
                          "by about 0.1 bit on independent data, so a 0.05 bit gap is too tight (see README)",
                   strict=True)
def test_null_scores_below_default_gap():
    hits = sum(orient_pair(*np.random.default_rng(s).standard_normal((2, 2000))).direction == INCONCLUSIVE
               for s in range(100))
    assert hits >= 90


def test_orientation_insertion_with_cycle_guard(monkeypatch):
    verdicts = {("a", "b"): (FORWARD, 0.9), ("b", "c"): (FORWARD, 0.7), ("a", "c"): (BACKWARD, 0.5)}
    series = {"a": 0, "b": 1, "c": 2}

    def fake(u, v, config=None):
        names = ("a", "b", "c")
        d, s = verdicts[(names[u], names[v])]
        from radice.entropy import OrientationVerdict
        return OrientationVerdict(d, s)

    monkeypatch.setattr("radice.entropy.orient_pair", fake)
    g = CausalGraph(["a", "b", "c"])
    out = entropy_orientation([("c", "a"), ("b", "a"), ("b", "c")], g, series)
    assert out.inserted == [("a", "b"), ("b", "c")]
    assert out.cycle_rejected == [("c", "a")]
    assert g.is_lag0_acyclic()


def test_insertion_independent_of_pair_order():
    rng = np.random.default_rng(5)
    names = [f"m{i}" for i in range(6)]
    base = rng.standard_normal(80)
    series = {m: np.round(base * (k + 1)) + rng.standard_normal(80) * 0.5 for k, m in enumerate(names)}
    pairs = [(a, b) for k, a in enumerate(names) for b in names[k + 1:]]
    results = set()
    for _ in range(5):
        order = [tuple(p[::-1]) if rng.random() < 0.5 else p for p in rng.permutation(pairs).tolist()]
        g = CausalGraph(names)
        out = entropy_orientation([tuple(p) for p in order], g, series)
        assert g.is_lag0_acyclic()
        results.add(tuple(out.inserted))
    assert len(results) == 1


def test_failed_pair_is_inconclusive():
    g = CausalGraph(["a", "b"])
    out = entropy_orientation([("a", "b")], g, {"a": np.zeros(5), "b": np.zeros(5)})
    assert out.inconclusive == [("a", "b")] and not g.directed_edges


def test_empty_pair_list():
    g = CausalGraph(["a"])
    out = entropy_orientation([], g, {})
    assert not out.inserted and not g.directed_edges
