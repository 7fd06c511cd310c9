"""Static binary M-tree with exact branch-and-bound nearest-neighbor search.

The tree is bulk-loaded top down. Each split picks two far-apart pivots with
a double sweep (farthest point from a start point, then farthest from that),
projects every member onto the pivot pair with ``d(p, left) - d(p, right)``
and cuts at the median, so depth is logarithmic in the number of leaves.

Every routing entry stores its pivot, the covering radius of its subtree and
the pivot's distance to the parent pivot. Searches skip a subtree when
``d(q, pivot) - covering_radius`` exceeds the best distance found so far, and
skip even that distance computation when the stored parent distance already
proves the subtree (or leaf object) too far away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .embed import EmbedConfig, NodeVector, distance
from .errors import EmptyIndexError

DEFAULT_LEAF_CAPACITY = 16
# guards pruning decisions against rounding in computed distances
PRUNE_SLACK = 1e-9


@dataclass
class QueryStats:
    distance_evaluations: int = 0
    nodes_visited: int = 0
    parent_pruned: int = 0


@dataclass(eq=False)
class RoutingEntry:
    pivot: int
    covering_radius: float
    child: MTreeNode
    parent_distance: float


@dataclass(eq=False)
class MTreeNode:
    """Leaf nodes carry ``objects`` as ``(object_id, distance_to_parent_pivot)``;
    internal nodes carry exactly two ``routes``."""

    parent_pivot: int | None
    objects: list[tuple[int, float]] | None = None
    routes: tuple[RoutingEntry, RoutingEntry] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.routes is None


@dataclass(eq=False)
class MTree:
    points: list[NodeVector]
    cfg: EmbedConfig
    root: MTreeNode
    leaf_capacity: int
    build_evaluations: int = 0
    seed: int = 0
    _depth: int | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.points)

    def depth(self) -> int:
        """Number of edges on the longest root-to-leaf path."""
        if self._depth is None:
            best = 0
            stack = [(self.root, 0)]
            while stack:
                node, d = stack.pop()
                if node.is_leaf:
                    best = max(best, d)
                else:
                    stack.extend((e.child, d + 1) for e in node.routes)
            self._depth = best
        return self._depth

    def query(self, q: NodeVector, exclude: int | None = None):
        return nn_query(self, q, exclude=exclude)


class _Builder:
    def __init__(self, points: Sequence[NodeVector], cfg: EmbedConfig, leaf_capacity: int):
        self.points = points
        self.cfg = cfg
        self.cap = leaf_capacity
        self.evaluations = 0

    def dists(self, src: int, ids: np.ndarray) -> np.ndarray:
        p, cfg, pts = self.points[src], self.cfg, self.points
        self.evaluations += len(ids)
        return np.fromiter((distance(p, pts[i], cfg) for i in ids), dtype=float, count=len(ids))

    def build(self, ids: np.ndarray, parent: int | None, to_parent: np.ndarray) -> MTreeNode:
        if len(ids) <= self.cap:
            return MTreeNode(parent, objects=list(zip(ids.tolist(), to_parent.tolist())))

        # double sweep; np.argmax returns the first maximum and ids are sorted,
        # so ties go to the smaller id
        p1 = int(ids[np.argmax(to_parent)])
        d1 = self.dists(p1, ids)
        p2 = int(ids[np.argmax(d1)])
        d2 = self.dists(p2, ids)

        order = np.lexsort((ids, d1 - d2))
        half = (len(ids) + 1) // 2
        lmask = np.zeros(len(ids), dtype=bool)
        lmask[order[:half]] = True
        rmask = ~lmask

        pos = {int(i): k for k, i in enumerate(ids)}
        routes = []
        for pivot, d, mask in ((p1, d1, lmask), (p2, d2, rmask)):
            child = self.build(ids[mask], pivot, d[mask])
            parent_distance = float(to_parent[pos[pivot]]) if parent is not None else 0.0
            routes.append(RoutingEntry(pivot, float(d[mask].max()), child, parent_distance))
        return MTreeNode(parent, routes=tuple(routes))


def build_mtree(
    points: Sequence[NodeVector],
    cfg: EmbedConfig,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    seed: int = 0,
) -> MTree:
    """Bulk-load an M-tree over ``points``; object ids are list positions.

    ``seed`` only chooses the start of the root's pivot sweep, so equal
    inputs and seed give an identical tree.
    """
    if len(points) == 0:
        raise EmptyIndexError("cannot build an M-tree over zero points")
    if leaf_capacity < 1:
        raise ValueError("leaf_capacity must be >= 1")
    points = list(points)
    b = _Builder(points, cfg, leaf_capacity)
    ids = np.arange(len(points))
    if len(points) <= leaf_capacity:
        root = MTreeNode(None, objects=[(i, 0.0) for i in range(len(points))])
    else:
        start = int(np.random.default_rng(seed).integers(len(points)))
        # the start point only seeds the sweep; the root itself has no parent pivot
        root = b.build(ids, None, b.dists(start, ids))
    return MTree(points, cfg, root, leaf_capacity, b.evaluations, seed)


def nn_query(tree: MTree, q: NodeVector, exclude: int | None = None) -> tuple[int, float, QueryStats]:
    """Exact nearest neighbor of ``q``; ties go to the smaller object id.

    ``exclude`` names one object id that may not be returned, which turns a
    query by a stored point into a nearest *other* point search.
    """
    if tree is None or len(tree.points) == 0:
        raise EmptyIndexError("nearest-neighbor query on an empty index")
    pts, cfg = tree.points, tree.cfg
    stats = QueryStats()
    best_d, best_id = math.inf, -1

    def consider(d: float, oid: int) -> None:
        nonlocal best_d, best_id
        if oid != exclude and (d < best_d or (d == best_d and oid < best_id)):
            best_d, best_id = d, oid

    # entries: (lower_bound, node, d(q, node.parent_pivot) or None)
    stack: list[tuple[float, MTreeNode, float | None]] = [(0.0, tree.root, None)]
    while stack:
        lb, node, dqp = stack.pop()
        if lb > best_d + PRUNE_SLACK:
            continue
        stats.nodes_visited += 1
        if node.is_leaf:
            for oid, pd in node.objects:
                if oid == exclude:
                    continue
                if oid == node.parent_pivot:
                    d = dqp
                elif dqp is not None and abs(dqp - pd) > best_d + PRUNE_SLACK:
                    continue
                else:
                    d = distance(q, pts[oid], cfg)
                    stats.distance_evaluations += 1
                consider(d, oid)
            continue

        children = []
        for e in node.routes:
            if dqp is not None and abs(dqp - e.parent_distance) > best_d + e.covering_radius + PRUNE_SLACK:
                stats.parent_pruned += 1
                continue
            if e.pivot == node.parent_pivot:
                dp = dqp
            else:
                dp = distance(q, pts[e.pivot], cfg)
                stats.distance_evaluations += 1
            consider(dp, e.pivot)
            children.append((max(dp - e.covering_radius, 0.0), dp, e))
        # push the farther child first so the nearer one is explored first
        children.sort(key=lambda c: (c[0], c[1]), reverse=True)
        for clb, dp, e in children:
            if clb <= best_d + PRUNE_SLACK:
                stack.append((clb, e.child, dp))

    if best_id < 0:
        raise EmptyIndexError("no eligible object in the index")
    return best_id, best_d, stats


def validate(tree: MTree, tol: float = 1e-9) -> list[str]:
    """Exhaustively check the structural invariants; returns violation messages."""
    problems: list[str] = []
    pts, cfg = tree.points, tree.cfg

    def check(node: MTreeNode) -> list[int]:
        if node.is_leaf:
            if len(node.objects) > tree.leaf_capacity:
                problems.append(f"leaf holds {len(node.objects)} > {tree.leaf_capacity} objects")
            for oid, pd in node.objects:
                if node.parent_pivot is not None:
                    true = distance(pts[oid], pts[node.parent_pivot], cfg)
                    if abs(true - pd) > tol:
                        problems.append(f"object {oid}: stored parent distance {pd} != {true}")
            return [oid for oid, _ in node.objects]
        sets = []
        for e in node.routes:
            if e.child.parent_pivot != e.pivot:
                problems.append(f"child of pivot {e.pivot} records parent {e.child.parent_pivot}")
            if node.parent_pivot is not None:
                true = distance(pts[e.pivot], pts[node.parent_pivot], cfg)
                if abs(true - e.parent_distance) > tol:
                    problems.append(f"pivot {e.pivot}: parent distance {e.parent_distance} != {true}")
            sub = check(e.child)
            for oid in sub:
                d = distance(pts[oid], pts[e.pivot], cfg)
                if d > e.covering_radius + tol:
                    problems.append(f"object {oid} at {d} outside covering radius {e.covering_radius} of {e.pivot}")
            sets.append(set(sub))
        if sets[0] & sets[1]:
            problems.append("sibling subtrees share objects")
        return [*sets[0], *sets[1]]

    found = check(tree.root)
    if sorted(found) != list(range(len(pts))):
        problems.append("tree does not hold every object exactly once")
    return problems
