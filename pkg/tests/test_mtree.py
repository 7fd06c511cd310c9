import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcom import EmbedConfig, Embedding, EmptyIndexError, NodeVector, build_mtree, nn_query
from netcom.embed import distance
from netcom.mtree import validate
from netcom.synth import clustered_points

CFG = EmbedConfig()


def brute(points, q, exclude=None):
    best = min(
        (distance(q, p, CFG), i) for i, p in enumerate(points) if i != exclude
    )
    return best[1], best[0]


def test_small_input_is_one_leaf():
    pts, _ = clustered_points(10, seed=1)
    tree = build_mtree(pts, CFG, leaf_capacity=16)
    assert tree.root.is_leaf and tree.depth() == 0
    assert tree.build_evaluations == 0


def test_depth_bound_for_1024_points():
    pts, _ = clustered_points(1024, seed=2)
    tree = build_mtree(pts, CFG, leaf_capacity=16)
    assert tree.depth() <= 7
    assert validate(tree) == []


def test_barbell_tree_is_valid(bar_emb):
    tree = build_mtree(bar_emb.vectors, CFG, leaf_capacity=2)
    assert validate(tree) == []
    assert tree.depth() >= 1


def test_exact_against_linear_scan():
    pts, _ = clustered_points(128, dim=8, spread=0.1, seed=3)
    queries, _ = clustered_points(64, dim=8, spread=0.1, seed=4)
    tree = build_mtree(pts, CFG, leaf_capacity=4, seed=9)
    for q in queries:
        oid, d, _ = nn_query(tree, q)
        assert (oid, d) == brute(pts, q)


def test_query_equal_to_stored_point():
    pts, _ = clustered_points(200, seed=5)
    tree = build_mtree(pts, CFG, leaf_capacity=8)
    for i in (0, 57, 199):
        oid, d, _ = nn_query(tree, pts[i])
        assert d == 0.0
        assert distance(pts[oid], pts[i], CFG) == 0.0


def test_exclude_gives_nearest_other_point():
    pts, _ = clustered_points(300, seed=6)
    tree = build_mtree(pts, CFG, leaf_capacity=8)
    for i in range(0, 300, 17):
        assert nn_query(tree, pts[i], exclude=i)[:2] == brute(pts, pts[i], exclude=i)


def test_singleton_tree():
    p = NodeVector.from_dense(0, [1.0, 2.0])
    tree = build_mtree([p], CFG)
    assert nn_query(tree, NodeVector.from_dense(9, [2.0, 1.0]))[0] == 0
    with pytest.raises(EmptyIndexError):
        nn_query(tree, p, exclude=0)


def test_empty_input_rejected():
    with pytest.raises(EmptyIndexError):
        build_mtree([], CFG)


def test_build_is_deterministic():
    pts, _ = clustered_points(500, seed=7)

    def shape(node):
        if node.is_leaf:
            return tuple(o for o, _ in node.objects)
        return tuple((e.pivot, e.covering_radius, shape(e.child)) for e in node.routes)

    a = build_mtree(pts, CFG, 8, seed=3)
    b = build_mtree(pts, CFG, 8, seed=3)
    assert shape(a.root) == shape(b.root)
    assert a.build_evaluations == b.build_evaluations


def test_ties_go_to_smaller_id():
    # four copies of the same direction
    pts = [NodeVector.from_dense(i, [1.0, 1.0]) for i in range(4)] + [NodeVector.from_dense(4, [1.0, 0.0])]
    tree = build_mtree(pts, CFG, leaf_capacity=1)
    assert nn_query(tree, NodeVector.from_dense(9, [2.0, 2.0]))[0] == 0
    assert nn_query(tree, pts[0], exclude=0)[0] == 1


def test_graph_embedding_tree(karate):
    emb = Embedding.from_graph(karate, CFG)
    tree = build_mtree(emb.vectors, CFG, leaf_capacity=3)
    assert validate(tree) == []
    for u in range(34):
        oid, d, _ = nn_query(tree, emb[u], exclude=u)
        row = emb.distances_from(u).copy()
        row[u] = np.inf
        assert d == row.min() and oid == int(np.argmin(row))


@settings(max_examples=40, deadline=None)
@given(
    st.integers(2, 80),
    st.integers(1, 6),
    st.integers(0, 2**16),
)
def test_exactness_property(n, cap, seed):
    pts, _ = clustered_points(n, clusters=4, dim=5, spread=0.2, seed=seed)
    tree = build_mtree(pts, CFG, leaf_capacity=cap, seed=seed)
    assert validate(tree) == []
    q = pts[seed % n]
    assert nn_query(tree, q, exclude=seed % n)[:2] == brute(pts, q, exclude=seed % n)
