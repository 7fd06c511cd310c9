"""Partition quality: modularity and per-community conductance."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import UndefinedMeasureError
from .graph import Graph


def _labels(p) -> np.ndarray:
    return np.asarray(getattr(p, "assignment", p), dtype=np.int64)


def modularity(g: Graph, partition) -> float:
    """Newman modularity ``sum_c e_c/m - (d_c/2m)^2`` of a hard partition.

    ``partition`` is a :class:`~netcom.kcentral.Partition` or any sequence of
    community labels indexed by node id.
    """
    m = g.edge_count
    if m == 0:
        raise UndefinedMeasureError("modularity undefined for a graph without edges")
    labels = _labels(partition)
    if len(labels) != g.node_count:
        raise ValueError("partition does not cover the graph's nodes")
    rows = np.repeat(np.arange(g.node_count), g.degrees)
    same = labels[rows] == labels[g.indices]
    k = int(labels.max()) + 1 if len(labels) else 0
    # each intra edge is seen from both endpoints
    intra = np.bincount(labels[rows][same], minlength=k) / 2.0
    vol = np.bincount(labels, weights=g.degrees, minlength=k)
    return float(np.sum(intra / m - (vol / (2.0 * m)) ** 2))


def conductance(g: Graph, nodes: Iterable[int]) -> float:
    """``cut(S, S^c) / min(vol(S), vol(S^c))`` with vol the degree sum."""
    mask = np.zeros(g.node_count, dtype=bool)
    idx = np.fromiter(nodes, dtype=np.int64)
    if len(idx) and (idx.min() < 0 or idx.max() >= g.node_count):
        raise ValueError("node id out of range")
    mask[idx] = True
    size = int(mask.sum())
    if size == 0 or size == g.node_count:
        raise UndefinedMeasureError("conductance needs a nonempty proper subset")
    deg = g.degrees
    vol_s = int(deg[mask].sum())
    vol_c = int(deg[~mask].sum())
    if min(vol_s, vol_c) == 0:
        raise UndefinedMeasureError("conductance undefined when one side has zero volume")
    rows = np.repeat(np.arange(g.node_count), deg)
    cut = int(np.count_nonzero(mask[rows] & ~mask[g.indices]))
    return cut / min(vol_s, vol_c)


@dataclass
class QualityReport:
    """Scores of one run.

    ``conductance_per_community[c]`` is ``None`` where conductance is
    undefined (the community is the whole graph, or a side has no edges).
    ``conductance_mean`` is the headline conductance figure.
    """

    modularity: float | None
    conductance_per_community: list[float | None]
    conductance_min: float | None
    conductance_mean: float | None
    conductance_max: float | None
    runtime_ms: int
    backend: str
    k: int
    distance_evaluations: int = 0
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> QualityReport:
        return cls(**d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> QualityReport:
        return cls.from_dict(json.loads(s))


def quality_report(
    g: Graph,
    partition,
    runtime_ms: int = 0,
    backend: str = "exact",
    distance_evaluations: int | None = None,
) -> QualityReport:
    labels = _labels(partition)
    k = len(getattr(partition, "centers", ())) or (int(labels.max()) + 1 if len(labels) else 0)
    per: list[float | None] = []
    for c in range(k):
        try:
            per.append(conductance(g, np.flatnonzero(labels == c)))
        except UndefinedMeasureError:
            per.append(None)
    defined: Sequence[float] = [x for x in per if x is not None]
    try:
        q = modularity(g, labels)
    except UndefinedMeasureError:
        q = None
    if distance_evaluations is None:
        distance_evaluations = int(getattr(partition, "distance_evaluations", 0))
    return QualityReport(
        modularity=q,
        conductance_per_community=per,
        conductance_min=min(defined) if defined else None,
        conductance_mean=float(np.mean(defined)) if defined else None,
        conductance_max=max(defined) if defined else None,
        runtime_ms=int(runtime_ms),
        backend=str(getattr(backend, "value", backend)),
        k=k,
        distance_evaluations=distance_evaluations,
        iterations=int(getattr(partition, "iterations", 0)),
    )
