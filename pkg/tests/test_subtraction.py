import numpy as np
import pytest

from helpers import pipeline_graph, random_dag
from oracles import subtraction_oracle
from radice.domain_knowledge import PartialGraphKnowledge
from radice.graph import CausalGraph
from radice.refinement import AdjustedScore
from radice.subtraction import RootCauseReport, order_candidates, select_path, subtract


def _scores(**kw):
    return {m: AdjustedScore(s, s, 0.0) for m, s in kw.items()}


def test_higher_level_goes_first():
    pk = PartialGraphKnowledge(levels={"a": 2, "b": 1})
    assert order_candidates(_scores(a=0.6, b=0.9), pk) == ["a", "b"]


def test_equal_levels_order_by_score():
    pk = PartialGraphKnowledge(levels={"a": 1, "b": 1})
    assert order_candidates(_scores(a=0.6, b=0.9), pk) == ["b", "a"]
    assert order_candidates(_scores(b=0.7, a=0.7), pk) == ["a", "b"]


def test_path_through_candidate_preferred():
    g = CausalGraph(["r", "m", "c", "t"], [("r", "t", 0), ("r", "c", 0), ("c", "m", 0), ("m", "t", 0)])
    assert select_path(g, "r", "t", {"r", "c"})[0] == ("r", "c", "m", "t")
    assert select_path(g, "r", "t", {"r"})[0] == ("r", "t")


def test_shortest_then_lexicographic():
    g = CausalGraph(["r", "a", "b", "c", "t"],
                    [("r", "b", 0), ("b", "t", 0), ("r", "a", 0), ("a", "t", 0), ("r", "c", 0), ("c", "b", 0)])
    assert select_path(g, "r", "t", {"r"})[0] == ("r", "a", "t")
    with pytest.raises(ValueError):
        select_path(g, "t", "t", set())


def test_pipeline_graph_subtraction():
    g = pipeline_graph()
    rep = subtract(g, _scores(X2=0.9, X8=0.8, X5=0.7), "X7")
    assert set(rep.root_causes) == {"X2", "X5"}
    assert rep.no_causal_path == ["X8"]
    assert set(rep.sub_graph.vertices) == {"X2", "X4", "X5", "X7"}
    assert rep.intermediates == ["X4"]
    assert set(rep.sub_graph.directed_edges) == {("X2", "X4", 0), ("X4", "X5", 1), ("X5", "X7", 0)}


def test_unknown_target():
    with pytest.raises(ValueError):
        subtract(pipeline_graph(), {}, "nope")
    rep = subtract(pipeline_graph(), {}, "X7")
    assert rep.sub_graph.vertices == ["X7"] and not rep.root_causes


def test_matches_oracle_on_random_graphs():
    rng = np.random.default_rng(9)
    for _ in range(150):
        n = int(rng.integers(3, 10))
        g = random_dag(rng, n, p=0.35, lag1=0.3)
        if rng.random() < 0.5:
            u, v = rng.choice(g.vertices, 2, replace=False)
            if not g.has_directed(str(u), str(v)):
                g.add_directed(str(u), str(v), 1)
        target = str(rng.choice(g.vertices))
        others = [v for v in g.vertices if v != target]
        picked = rng.choice(others, int(rng.integers(1, len(others) + 1)), replace=False)
        scores = {str(m): float(rng.choice([0.6, 0.7, 0.8, 0.9])) for m in picked}
        levels = {v: int(rng.integers(0, 3)) for v in g.vertices if rng.random() < 0.6}
        rep = subtract(g, _scores(**scores), target, PartialGraphKnowledge(levels=levels))
        roots, verts, edges = subtraction_oracle(g.vertices, g.directed_edges, scores, levels, target)
        assert set(rep.root_causes) == roots
        assert set(rep.sub_graph.vertices) == verts
        assert set(rep.sub_graph.directed_edges) == edges


def test_report_round_trip():
    rep = subtract(pipeline_graph(), _scores(X2=0.9, X8=0.8), "X7")
    back = RootCauseReport.from_dict(rep.to_dict())
    assert back.to_dict() == rep.to_dict()
    dot = rep.to_dot()
    assert "style=dashed" in dot and "doubleoctagon" in dot
