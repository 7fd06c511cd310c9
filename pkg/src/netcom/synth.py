"""Seeded synthetic inputs: small named graphs, planted partitions, clustered points."""

from __future__ import annotations

import numpy as np

from .embed import NodeVector
from .graph import Graph, from_edges


def path_graph(n: int) -> Graph:
    return from_edges(range(n - 1), range(1, n), labels=range(n))


def complete_graph(n: int) -> Graph:
    src, dst = np.triu_indices(n, k=1)
    return from_edges(src, dst, labels=range(n))


def barbell() -> Graph:
    """Triangles {0,1,2} and {3,4,5} joined by the bridge 2-3."""
    edges = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]
    return from_edges([a for a, _ in edges], [b for _, b in edges])


def planted_partition(
    blocks: int,
    block_size: int,
    p_in: float,
    p_out: float,
    seed: int = 0,
) -> tuple[Graph, np.ndarray]:
    """Stochastic block model with equal blocks; returns the graph and block labels.

    Node ``u`` belongs to block ``u // block_size``. Every node is kept even
    if it ends up isolated.
    """
    rng = np.random.default_rng(seed)
    n = blocks * block_size
    truth = np.repeat(np.arange(blocks), block_size)
    src, dst = [], []
    # one row of the upper triangle at a time keeps memory at O(n)
    for u in range(n - 1):
        v = np.arange(u + 1, n)
        p = np.where(truth[v] == truth[u], p_in, p_out)
        hit = v[rng.random(len(v)) < p]
        src.append(np.full(len(hit), u))
        dst.append(hit)
    src = np.concatenate(src) if src else np.empty(0, np.int64)
    dst = np.concatenate(dst) if dst else np.empty(0, np.int64)
    return from_edges(src, dst, labels=range(n)), truth


def erdos_renyi(n: int, p: float, seed: int = 0) -> Graph:
    g, _ = planted_partition(1, n, p, p, seed)
    return g


def clustered_points(
    n: int,
    clusters: int = 16,
    dim: int = 8,
    spread: float = 0.03,
    seed: int = 0,
) -> tuple[list[NodeVector], np.ndarray]:
    """Gaussian blobs projected onto the positive orthant of the unit sphere.

    Returns the vectors (owners ``0..n-1``) and each point's cluster label.
    """
    rng = np.random.default_rng(seed)
    centers = np.abs(rng.normal(size=(clusters, dim)))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    labels = rng.integers(clusters, size=n)
    x = np.abs(centers[labels] + spread * rng.normal(size=(n, dim)))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return [NodeVector.from_dense(i, row) for i, row in enumerate(x)], labels


def clustered_graph(
    clusters: int = 16,
    cluster_size: int = 40,
    p_in: float = 0.9,
    p_out: float = 0.002,
    seed: int = 0,
) -> tuple[Graph, np.ndarray]:
    """Planted partition with near-clique clusters, whose embedded rows form tight groups."""
    return planted_partition(clusters, cluster_size, p_in, p_out, seed)
