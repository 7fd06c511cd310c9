"""Pivot-threshold locality-sensitive hashing over a metric embedding.

Each hash bit is ``[d(x, pivot) <= threshold]`` for a pivot drawn from the
data. A table concatenates ``bits`` such functions into one key; ``tables``
independent tables are built. A query scans the union of its buckets and
rescores the candidates with exact distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .embed import EmbedConfig, NodeVector, distance
from .errors import DomainError, EmptyIndexError


@dataclass(frozen=True)
class LshParams:
    """``threshold`` is ``"median"`` or a fixed float radius."""

    bits: int = 8
    tables: int = 4
    threshold: str | float = "median"
    seed: int = 0

    def __post_init__(self):
        if self.bits < 1:
            raise DomainError("bits per table must be >= 1")
        if self.tables < 1:
            raise DomainError("table count must be >= 1")
        if isinstance(self.threshold, str):
            if self.threshold != "median":
                raise DomainError(f"unknown threshold rule {self.threshold!r}")
        elif not math.isfinite(self.threshold) or self.threshold < 0:
            raise DomainError("fixed threshold must be finite and >= 0")


@dataclass(frozen=True)
class HashFunction:
    pivot: int  # object id of the pivot
    threshold: float


class LshIndex:
    def __init__(
        self,
        points: list[NodeVector],
        cfg: EmbedConfig,
        params: LshParams,
        functions: list[list[HashFunction]],
        tables: list[dict[int, list[int]]],
        keys: list[np.ndarray],
        build_evaluations: int,
    ):
        self.points = points
        self.cfg = cfg
        self.params = params
        self.functions = functions
        self.tables = tables
        self.keys = keys  # keys[t][oid] is the bucket of stored object oid in table t
        self.build_evaluations = build_evaluations

    def __len__(self) -> int:
        return len(self.points)

    @property
    def pivot_count(self) -> int:
        return self.params.bits * self.params.tables

    def query(self, q: NodeVector, exclude: int | None = None):
        return ann_query(self, q, exclude=exclude)


def _key(dists: Sequence[float], funcs: Sequence[HashFunction]) -> int:
    key = 0
    for bit, (d, h) in enumerate(zip(dists, funcs)):
        if d <= h.threshold:
            key |= 1 << bit
    return key


def balanced_threshold(dists: np.ndarray) -> float:
    """Median-style threshold that stays informative under heavy ties.

    Picks the data value ``v`` whose ``#{d <= v}`` is closest to ``n / 2``
    (the larger one on a tie) and returns the midpoint between ``v`` and the
    next distinct value. Without ties the split is the median split; with a
    tied majority at the median (e.g. many orthogonal rows) the bit still
    separates the tied block from the rest instead of being constant.
    """
    vals, counts = np.unique(dists, return_counts=True)
    below = np.cumsum(counts)
    gap = np.abs(2 * below - len(dists))
    i = len(gap) - 1 - int(np.argmin(gap[::-1]))
    if i + 1 < len(vals):
        return float((vals[i] + vals[i + 1]) / 2)
    return float(vals[i])


def build_lsh(points: Sequence[NodeVector], cfg: EmbedConfig, params: LshParams = LshParams()) -> LshIndex:
    """Hash every point into ``params.tables`` tables; deterministic in the seed."""
    points = list(points)
    n = len(points)
    if n == 0:
        raise EmptyIndexError("cannot build an LSH index over zero points")
    m = params.bits * params.tables
    rng = np.random.default_rng(params.seed)
    pivots = rng.choice(n, size=m, replace=m > n)

    # pivot x point distance matrix; one row per hash function
    evals = 0
    dmat = np.empty((m, n))
    for r, p in enumerate(pivots):
        pv = points[p]
        dmat[r] = [distance(pv, x, cfg) for x in points]
        evals += n
    if params.threshold == "median":
        thresholds = np.array([balanced_threshold(row) for row in dmat])
    else:
        thresholds = np.full(m, float(params.threshold))

    functions = []
    tables = []
    all_keys = []
    for t in range(params.tables):
        lo, hi = t * params.bits, (t + 1) * params.bits
        funcs = [HashFunction(int(pivots[r]), float(thresholds[r])) for r in range(lo, hi)]
        bits = dmat[lo:hi] <= thresholds[lo:hi, None]
        weights = 1 << np.arange(params.bits, dtype=np.int64)
        keys = (bits.astype(np.int64) * weights[:, None]).sum(axis=0)
        table: dict[int, list[int]] = {}
        for oid, key in enumerate(keys.tolist()):
            table.setdefault(key, []).append(oid)
        functions.append(funcs)
        tables.append(table)
        all_keys.append(keys)
    return LshIndex(points, cfg, params, functions, tables, all_keys, evals)


def hash_key(idx: LshIndex, table: int, x: NodeVector) -> int:
    """Bit ``i`` of the key is set iff ``d(x, pivot_i) <= threshold_i``."""
    if not 0 <= table < len(idx.tables):
        raise DomainError(f"table {table} out of range [0, {len(idx.tables)})")
    funcs = idx.functions[table]
    return _key([distance(x, idx.points[h.pivot], idx.cfg) for h in funcs], funcs)


def ann_query(idx: LshIndex, q: NodeVector, exclude: int | None = None) -> tuple[int, float, int]:
    """Approximate nearest neighbor: ``(object_id, distance, candidates_scanned)``.

    The distance is exact for the returned object. An empty bucket union
    falls back to a full scan, reported as ``candidates_scanned == n``
    (``n - 1`` when one object is excluded). The total distance evaluations
    of a query are ``idx.pivot_count + candidates_scanned``.
    """
    if idx is None or len(idx.points) == 0:
        raise EmptyIndexError("nearest-neighbor query on an empty index")
    pts, cfg = idx.points, idx.cfg
    cands: set[int] = set()
    for t in range(len(idx.tables)):
        cands.update(idx.tables[t].get(hash_key(idx, t, q), ()))
    cands.discard(exclude)
    if not cands:
        cands = set(range(len(pts)))
        cands.discard(exclude)
        if not cands:
            raise EmptyIndexError("no eligible object in the index")

    best_d, best_id = math.inf, -1
    for oid in sorted(cands):
        d = distance(q, pts[oid], cfg)
        if d < best_d:
            best_d, best_id = d, oid
    return best_id, best_d, len(cands)


def collision_rate(idx: LshIndex, a: int, b: int) -> float:
    """Fraction of tables in which stored objects ``a`` and ``b`` share a bucket."""
    return sum(int(k[a] == k[b]) for k in idx.keys) / len(idx.keys)


def bit_agreement(idx: LshIndex, a: int, b: int) -> float:
    """Fraction of individual hash functions on which ``a`` and ``b`` agree."""
    agree = sum(bin(~(int(k[a]) ^ int(k[b])) & ((1 << idx.params.bits) - 1)).count("1") for k in idx.keys)
    return agree / idx.pivot_count
