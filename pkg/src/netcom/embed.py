"""Metric embedding of graph nodes.

Every node ``x`` becomes the sparse row of ``L = diag(lam) + A``: value
``lam`` (or a per-node ``lam(x)``) at column ``x`` and 1 at each neighbor
column. Two rows are compared with a correlation-type similarity ``sigma``
and turned into a distance by ``phi``. Only ``(cosine, arccos)`` is a
guaranteed (pseudo)metric, the angle between rows in radians.

Scalar routines work on :class:`NodeVector` objects; :class:`Embedding`
additionally keeps all rows in a CSR matrix for block distance computations.
Both paths use the same arithmetic so they agree bit for bit on integer rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.stats import rankdata

from .errors import DomainError, UndefinedSimilarityError
from .graph import Graph, _check_node

# relative threshold below which a variance is treated as zero
_VAR_EPS = 1e-12


class Sigma(str, Enum):
    COSINE = "cosine"
    PEARSON = "pearson"
    SPEARMAN = "spearman"


class Phi(str, Enum):
    ARCCOS = "arccos"
    LINEAR = "linear"  # 1 - sigma


class Baseline(str, Enum):
    COMMON_NEIGHBORS = "common_neighbors"
    JACCARD = "jaccard"
    PREFERENTIAL_ATTACHMENT = "preferential_attachment"


@dataclass(frozen=True)
class EmbedConfig:
    """How nodes are mapped to vectors and how vectors are compared.

    With ``per_node=True`` the diagonal value comes from ``lam_fn(node)``;
    when no function is given the graph's mean degree is used for every node.
    """

    lam: float = 1.0
    sigma: Sigma = Sigma.COSINE
    phi: Phi = Phi.ARCCOS
    per_node: bool = False
    lam_fn: Callable[[int], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sigma", Sigma(self.sigma))
        object.__setattr__(self, "phi", Phi(self.phi))
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be a finite value >= 0, got {self.lam}")

    @property
    def metric_guaranteed(self) -> bool:
        return self.sigma is Sigma.COSINE and self.phi is Phi.ARCCOS

    def node_lambdas(self, g: Graph) -> np.ndarray:
        n = g.node_count
        if not self.per_node:
            return np.full(n, float(self.lam))
        if self.lam_fn is None:
            mean_deg = 2.0 * g.edge_count / n if n else 0.0
            return np.full(n, mean_deg)
        lams = np.array([float(self.lam_fn(u)) for u in range(n)])
        if np.any(~np.isfinite(lams)) or np.any(lams < 0):
            raise DomainError("per-node lambda must be finite and >= 0 for every node")
        return lams


def auto_lambda(g: Graph) -> float:
    """Sparse graphs get 2, moderately dense 1, dense 0 (by mean degree)."""
    mean_deg = 2.0 * g.edge_count / g.node_count if g.node_count else 0.0
    if mean_deg < 4:
        return 2.0
    if mean_deg <= 50:
        return 1.0
    return 0.0


@dataclass(frozen=True, eq=False)
class NodeVector:
    """Sparse real vector of length ``dim`` owned by object ``owner``."""

    owner: int
    entries: dict[int, float]
    dim: int
    norm: float = field(init=False)
    sq: float = field(init=False)
    total: float = field(init=False)

    def __post_init__(self):
        vals = list(self.entries.values())
        sq = math.fsum([v * v for v in vals])
        total = math.fsum(vals)
        object.__setattr__(self, "sq", sq)
        object.__setattr__(self, "total", total)
        object.__setattr__(self, "norm", math.sqrt(sq))

    @classmethod
    def from_dense(cls, owner: int, values: Sequence[float]) -> NodeVector:
        return cls(owner, {i: float(v) for i, v in enumerate(values) if v != 0}, len(values))

    def dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, v in self.entries.items():
            out[i] = v
        return out

    def __repr__(self) -> str:
        return f"NodeVector(owner={self.owner}, nnz={len(self.entries)}, dim={self.dim})"


def lx_row(g: Graph, cfg: EmbedConfig, u: int, lambdas: np.ndarray | None = None) -> NodeVector:
    _check_node(g, u)
    if lambdas is None:
        lambdas = cfg.node_lambdas(g) if cfg.per_node else None
    lam = float(lambdas[u]) if lambdas is not None else float(cfg.lam)
    entries = {u: lam}
    for v in g.neighbor_array(u).tolist():
        entries[v] = 1.0
    return NodeVector(u, dict(sorted(entries.items())), g.node_count)


def _dot(a: NodeVector, b: NodeVector) -> float:
    if len(a.entries) > len(b.entries):
        a, b = b, a
    be = b.entries
    # fsum is exactly rounded, so the result is independent of argument order
    return math.fsum([v * be[i] for i, v in a.entries.items() if i in be])


def _pearson(dot: float, sa: float, sb: float, ta: float, tb: float, n: int) -> float:
    var_a = sa - ta * ta / n
    var_b = sb - tb * tb / n
    if var_a <= _VAR_EPS * max(sa, 1.0) or var_b <= _VAR_EPS * max(sb, 1.0):
        raise UndefinedSimilarityError("pearson similarity undefined for a constant vector")
    return (dot - ta * tb / n) / math.sqrt(var_a * var_b)


def _spearman(a: NodeVector, b: NodeVector) -> float:
    # ranks over the union of stored positions; rows from lx_row always store
    # their diagonal, so both owner columns are included
    cols = sorted(set(a.entries) | set(b.entries))
    if len(cols) < 2:
        raise UndefinedSimilarityError("spearman similarity undefined for a constant vector")
    ra = rankdata([a.entries.get(c, 0.0) for c in cols])
    rb = rankdata([b.entries.get(c, 0.0) for c in cols])
    ra -= ra.mean()
    rb -= rb.mean()
    den = math.sqrt(float(ra @ ra) * float(rb @ rb))
    if den == 0:
        raise UndefinedSimilarityError("spearman similarity undefined for a constant vector")
    return float(ra @ rb) / den


def similarity(a: NodeVector, b: NodeVector, sigma: Sigma | str = Sigma.COSINE) -> float:
    sigma = Sigma(sigma)
    if a.dim != b.dim:
        raise DomainError("vectors come from different embeddings")
    if sigma is Sigma.COSINE:
        if a.sq == 0 or b.sq == 0:
            raise UndefinedSimilarityError("cosine similarity undefined for a zero vector")
        return _dot(a, b) / math.sqrt(a.sq * b.sq)
    if sigma is Sigma.PEARSON:
        return _pearson(_dot(a, b), a.sq, b.sq, a.total, b.total, a.dim)
    return _spearman(a, b)


def _phi(s: float, phi: Phi) -> float:
    s = min(1.0, max(-1.0, s))
    if phi is Phi.ARCCOS:
        # np.arccos, not math.acos: keeps scalar and block results identical
        return float(np.arccos(s))
    return 1.0 - s


def distance(a: NodeVector, b: NodeVector, cfg: EmbedConfig) -> float:
    return _phi(similarity(a, b, cfg.sigma), cfg.phi)


def baseline_similarity(g: Graph, u: int, v: int, kind: Baseline | str) -> float:
    """Classic neighborhood scores: common neighbors, Jaccard, preferential attachment."""
    kind = Baseline(kind)
    nu, nv = g.neighbor_array(u), g.neighbor_array(v)
    if kind is Baseline.PREFERENTIAL_ATTACHMENT:
        return float(len(nu) * len(nv))
    common = len(np.intersect1d(nu, nv, assume_unique=True))
    if kind is Baseline.COMMON_NEIGHBORS:
        return float(common)
    union = len(nu) + len(nv) - common
    return common / union if union else 0.0


class Embedding:
    """A fixed set of vectors plus the config used to compare them.

    Object ids are positions ``0..len-1`` in ``vectors``.
    """

    def __init__(self, vectors: Sequence[NodeVector], cfg: EmbedConfig):
        if vectors:
            dim = vectors[0].dim
            if any(v.dim != dim for v in vectors):
                raise DomainError("all vectors must share one dimension")
        else:
            dim = 0
        self.vectors = list(vectors)
        self.cfg = cfg
        self.dim = dim
        rows, cols, vals = [], [], []
        for r, vec in enumerate(self.vectors):
            for c, x in vec.entries.items():
                rows.append(r)
                cols.append(c)
                vals.append(x)
        self.matrix = sp.csr_matrix(
            (np.asarray(vals, dtype=float), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
            shape=(len(self.vectors), dim),
        )
        self.matrix.sort_indices()
        self.sq = np.array([v.sq for v in self.vectors])
        self.totals = np.array([v.total for v in self.vectors])

    @classmethod
    def from_graph(cls, g: Graph, cfg: EmbedConfig) -> Embedding:
        lams = cfg.node_lambdas(g)
        return cls([lx_row(g, cfg, u, lams) for u in range(g.node_count)], cfg)

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, i: int) -> NodeVector:
        return self.vectors[i]

    def distance(self, i: int, j: int) -> float:
        return distance(self.vectors[i], self.vectors[j], self.cfg)

    def pairwise(self, rows: Sequence[int] | np.ndarray, cols: Sequence[int] | np.ndarray) -> np.ndarray:
        """Dense ``len(rows) x len(cols)`` distance block."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        sigma = self.cfg.sigma
        if sigma is Sigma.SPEARMAN:
            out = np.empty((len(rows), len(cols)))
            for a, i in enumerate(rows):
                for b, j in enumerate(cols):
                    out[a, b] = self.distance(int(i), int(j))
            return out
        dots = (self.matrix[rows] @ self.matrix[cols].T).toarray()
        sr, sc = self.sq[rows], self.sq[cols]
        if sigma is Sigma.COSINE:
            if np.any(sr == 0) or np.any(sc == 0):
                raise UndefinedSimilarityError("cosine similarity undefined for a zero vector")
            s = dots / np.sqrt(np.multiply.outer(sr, sc))
        else:
            n = self.dim
            tr, tc = self.totals[rows], self.totals[cols]
            var_r = sr - tr * tr / n
            var_c = sc - tc * tc / n
            if np.any(var_r <= _VAR_EPS * np.maximum(sr, 1.0)) or np.any(var_c <= _VAR_EPS * np.maximum(sc, 1.0)):
                raise UndefinedSimilarityError("pearson similarity undefined for a constant vector")
            s = (dots - np.multiply.outer(tr, tc) / n) / np.sqrt(np.multiply.outer(var_r, var_c))
        # an object is at distance 0 from itself whatever the summation order
        s[np.equal.outer(rows, cols)] = 1.0
        np.clip(s, -1.0, 1.0, out=s)
        if self.cfg.phi is Phi.ARCCOS:
            return np.arccos(s)
        return 1.0 - s

    def distances_from(self, i: int, cols: Sequence[int] | np.ndarray | None = None) -> np.ndarray:
        if cols is None:
            cols = np.arange(len(self))
        return self.pairwise([i], cols)[0]
