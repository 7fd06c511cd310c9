import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcom import QualityReport, UndefinedMeasureError, conductance, detect_communities, modularity, quality_report
from netcom.graph import from_edges
from netcom.synth import complete_graph, erdos_renyi


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.node_count))
    h.add_edges_from(g.edges())
    return h


def test_barbell_values(bar):
    labels = [0, 0, 0, 1, 1, 1]
    assert modularity(bar, labels) == pytest.approx(0.357143, abs=1e-6)
    assert conductance(bar, [0, 1, 2]) == pytest.approx(1 / 7)
    assert conductance(bar, [3, 4, 5]) == pytest.approx(1 / 7)


def test_single_community_has_zero_modularity(karate):
    assert modularity(karate, np.zeros(34, dtype=int)) == pytest.approx(0.0, abs=1e-12)


def test_triangle_singletons():
    assert modularity(complete_graph(3), [0, 1, 2]) == pytest.approx(-1 / 3)


def test_conductance_edge_cases(bar):
    assert conductance(bar, [0]) == 1.0
    g = from_edges([0, 2], [1, 3])
    assert conductance(g, [0, 1]) == 0.0


def test_undefined_measures(bar):
    with pytest.raises(UndefinedMeasureError):
        conductance(bar, [])
    with pytest.raises(UndefinedMeasureError):
        conductance(bar, range(6))
    g = from_edges([0], [1], labels=[0, 1, 2])
    with pytest.raises(UndefinedMeasureError):
        conductance(g, [2])
    with pytest.raises(UndefinedMeasureError):
        modularity(from_edges([], [], labels=[0, 1]), [0, 1])
    with pytest.raises(ValueError):
        modularity(bar, [0, 1])


def test_against_networkx(karate, planted_1k):
    for g, labels in [
        (karate, np.arange(34) % 3),
        (planted_1k[0], planted_1k[1]),
    ]:
        h = to_nx(g)
        comms = [set(np.flatnonzero(labels == c).tolist()) for c in np.unique(labels)]
        assert modularity(g, labels) == pytest.approx(nx.community.modularity(h, comms), abs=1e-9)
        for c in comms:
            assert conductance(g, c) == pytest.approx(nx.conductance(h, c), abs=1e-12)


def test_report_round_trip(bar, bar_emb):
    p = detect_communities(bar_emb, 2)
    rep = quality_report(bar, p, runtime_ms=12, backend="mtree")
    assert rep.k == 2 and rep.backend == "mtree"
    assert rep.conductance_per_community == pytest.approx([1 / 7, 1 / 7])
    assert rep.conductance_mean == pytest.approx(1 / 7)
    assert rep.distance_evaluations == p.distance_evaluations
    back = QualityReport.from_json(rep.to_json())
    assert back == rep
    assert json.loads(rep.to_json())["modularity"] == pytest.approx(0.357142857)


def test_report_with_one_community(bar, bar_emb):
    rep = quality_report(bar, detect_communities(bar_emb, 1))
    assert rep.modularity == pytest.approx(0.0, abs=1e-12)
    assert rep.conductance_per_community == [None]
    assert rep.conductance_mean is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_bounds_and_complement(seed, k):
    g = erdos_renyi(40, 0.1, seed=seed)
    if g.edge_count == 0:
        return
    labels = np.random.default_rng(seed).integers(k, size=40)
    q = modularity(g, labels)
    assert -0.5 - 1e-12 <= q <= 1.0
    s = np.flatnonzero(labels == 0)
    try:
        phi = conductance(g, s)
    except UndefinedMeasureError:
        return
    assert 0.0 <= phi <= 1.0
    assert phi == conductance(g, np.setdiff1d(np.arange(40), s))


def test_random_bipartition_of_random_graph_has_low_modularity():
    for seed in range(20):
        g = erdos_renyi(1000, 0.01, seed=seed)
        labels = np.random.default_rng(seed + 100).integers(2, size=1000)
        assert abs(modularity(g, labels)) < 0.05


def test_planted_truth_scores_high(planted_1k):
    g, truth = planted_1k
    assert modularity(g, truth) > 0.6
