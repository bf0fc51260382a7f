import json

import numpy as np
import pytest

from radice.graph import CausalGraph, GraphError
from radice.simulator import (BURN_IN, FIXTURE_SIZES, GroundTruthGraph, SimulationError, central_third, generate,
                              inject_anomaly, load_fixture, randomize_weights, simulate_run)


def _chain(w=0.8, lag=1):
    g = CausalGraph(["a", "b", "c"], [("a", "b", lag)])
    return GroundTruthGraph(g, {("a", "b", lag): w}, "b", ["a"])


def test_weights_are_uniform_on_the_open_range():
    gt = load_fixture(25)
    rounds = 10_000 // len(gt.weights) + 1
    draws = np.concatenate([list(randomize_weights(gt, s).weights.values()) for s in range(rounds)])
    assert len(draws) >= 10_000
    assert draws.min() >= 0.1 and draws.max() <= 0.9
    assert 0.49 <= draws.mean() <= 0.51


def test_isolated_vertex_is_unit_noise():
    stds = [generate(_chain(), 1000, s).series("c").std() for s in range(5)]
    assert all(0.85 <= s <= 1.15 for s in stds)


def test_lag_one_weight_recovered_by_regression():
    ds = generate(_chain(0.8), 5000, 3)
    a, b = ds.series("a"), ds.series("b")
    coef = np.linalg.lstsq(a[:-1, None], b[1:], rcond=None)[0][0]
    assert coef == pytest.approx(0.8, abs=0.05)


def test_injection_leaves_non_descendants_alone():
    gt = randomize_weights(load_fixture(10), 1)
    run = inject_anomaly(gt, 99, 5)
    clean = np.random.default_rng(5).standard_normal((gt.size, 99 + BURN_IN))
    base = generate(gt, 99, None, noise=clean)
    changed = {m for m in gt.graph.vertices if not np.array_equal(base.series(m), run.dataset.series(m))}
    assert changed == run.affected
    assert run.affected == {run.injected_root} | gt.graph.descendants(run.injected_root)
    # nothing moves before the window starts
    w = run.anomaly_window
    assert np.array_equal(base.values[:, :w.start], run.dataset.values[:, :w.start])


def test_level_shift_size_on_the_root():
    gt = _chain(0.5, 0)
    run = inject_anomaly(gt, 99, 0, delta=3.0, root="a")
    clean = generate(gt, 99, None, noise=np.random.default_rng(0).standard_normal((3, 99 + BURN_IN)))
    diff = clean.series("a") - run.dataset.series("a")
    w = run.anomaly_window
    assert np.allclose(diff[w.start:w.end + 1], 3.0)
    assert np.allclose(np.delete(diff, np.arange(w.start, w.end + 1)), 0.0)


def test_central_third():
    w = central_third(99)
    assert (w.start, w.end) == (33, 65)


def test_runs_are_deterministic():
    gt = load_fixture(15)
    a, b = simulate_run(gt, 99, 42), simulate_run(gt, 99, 42)
    assert np.array_equal(a.dataset.values, b.dataset.values)
    assert a.injected_root == b.injected_root and a.weights == b.weights
    assert not np.array_equal(a.dataset.values, simulate_run(gt, 99, 43).dataset.values)


@pytest.mark.parametrize("size", FIXTURE_SIZES)
def test_performance_metric_drops_on_average(size):
    gt = load_fixture(size)
    assert gt.size == size and gt.eligible_roots
    drops = []
    for s in range(30):
        run = simulate_run(gt, 99, s)
        x, w = run.dataset.series(gt.performance), run.anomaly_window
        inside = x[w.start:w.end + 1]
        outside = np.concatenate([x[:w.start], x[w.end + 1:]])
        drops.append((outside.mean() - inside.mean()) / outside.std())
    assert np.mean(drops) > 0.25


def test_fixture_round_trip(tmp_path):
    gt = load_fixture(5)
    p = tmp_path / "g.json"
    gt.save(p)
    assert GroundTruthGraph.load(p).to_dict() == gt.to_dict()


def test_invalid_graphs():
    g = CausalGraph(["a", "b"], [("a", "b", 0)])
    with pytest.raises(GraphError):
        GroundTruthGraph(g, {}, "zz", [])
    with pytest.raises(GraphError, match="no causal path"):
        GroundTruthGraph(g, {}, "a", ["b"])
    with pytest.raises(GraphError):
        GroundTruthGraph(g, {("b", "a", 0): 1.0}, "b", ["a"])
    with pytest.raises(GraphError):
        GroundTruthGraph(CausalGraph(["a", "b"], undirected=[("a", "b")]), {}, "b", [])
    with pytest.raises(GraphError, match="malformed"):
        GroundTruthGraph.from_dict({"vertices": ["a"]})


def test_explosive_weights_rejected():
    g = CausalGraph(["a"], [("a", "a", 1)])
    with pytest.raises(SimulationError):
        generate(GroundTruthGraph(g, {("a", "a", 1): 3.0}, "a", []), 200, 0)


def test_no_eligible_root():
    gt = GroundTruthGraph(CausalGraph(["a"]), {}, "a", [])
    with pytest.raises(SimulationError):
        inject_anomaly(gt, 30, 0)


def test_manifest_entry():
    run = simulate_run(load_fixture(5), 30, 1)
    entry = run.to_manifest("run_001.csv")
    assert json.loads(json.dumps(entry)) == entry
    assert entry["window"] == {"start": 10, "end": 19}


def test_small_fixture_drop_exceeds_one_noise_unit():
    gt = load_fixture(5)
    gaps = []
    for s in range(50):
        run = simulate_run(gt, 99, s)
        x, w = run.dataset.series(gt.performance), run.anomaly_window
        gaps.append(np.delete(x, np.arange(w.start, w.end + 1)).mean() - x[w.start:w.end + 1].mean())
    assert np.mean(gaps) >= 1.0
