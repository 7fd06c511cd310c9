"""Undirected simple graphs in CSR form, built from SNAP-style edge lists.

Edge-list format::

    # comment lines start with '#'
    <src> <dst> [ignored tokens ...]

Directed inputs are always symmetrized. Self-loops are dropped and repeated
edges collapse to one, so the resulting adjacency is that of a simple graph.
Original integer labels are kept in ``Graph.labels`` (dense id -> label);
dense ids are assigned in increasing label order.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np

from .errors import DomainError, ParseError


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph.

    ``indptr``/``indices`` hold the symmetric adjacency in CSR layout with
    every neighbor list sorted ascending.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray
    directed_input: bool = False
    _id_map: dict = field(default=None, repr=False)

    def __post_init__(self):
        for arr in (self.indptr, self.indices, self.labels):
            arr.setflags(write=False)
        if self._id_map is None:
            object.__setattr__(
                self, "_id_map", {int(lab): i for i, lab in enumerate(self.labels)}
            )

    @property
    def node_count(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def id_map(self) -> dict[int, int]:
        """Original label -> dense id."""
        return self._id_map

    def neighbors(self, u: int) -> list[int]:
        return neighbors(self, u)

    def degree(self, u: int) -> int:
        return degree(self, u)

    def neighbor_array(self, u: int) -> np.ndarray:
        _check_node(self, u)
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def edges(self) -> Iterable[tuple[int, int]]:
        """Yield each undirected edge once as ``(u, v)`` with ``u < v``."""
        for u in range(self.node_count):
            for v in self.indices[self.indptr[u] : self.indptr[u + 1]]:
                if u < v:
                    yield u, int(v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def _check_node(g: Graph, u: int) -> None:
    if not 0 <= u < g.node_count:
        raise DomainError(f"node id {u} out of range [0, {g.node_count})")


def neighbors(g: Graph, u: int) -> list[int]:
    """Sorted neighbor ids of ``u`` (never includes ``u``)."""
    _check_node(g, u)
    return g.indices[g.indptr[u] : g.indptr[u + 1]].tolist()


def degree(g: Graph, u: int) -> int:
    _check_node(g, u)
    return int(g.indptr[u + 1] - g.indptr[u])


def from_edges(
    src: Iterable[int] | np.ndarray,
    dst: Iterable[int] | np.ndarray,
    labels: Iterable[int] | np.ndarray | None = None,
    directed_input: bool = False,
) -> Graph:
    """Build a graph from parallel endpoint arrays of original labels.

    Every label appearing in ``src``/``dst`` (or in ``labels``, which may add
    isolated nodes) becomes a node.
    """
    src = np.asarray(list(src) if not isinstance(src, np.ndarray) else src, dtype=np.int64)
    dst = np.asarray(list(dst) if not isinstance(dst, np.ndarray) else dst, dtype=np.int64)
    if src.shape != dst.shape:
        raise ValueError("src and dst must have the same length")
    pool = [src, dst]
    if labels is not None:
        pool.append(np.asarray(list(labels), dtype=np.int64))
    uniq = np.unique(np.concatenate(pool)) if any(len(p) for p in pool) else np.empty(0, np.int64)
    n = len(uniq)
    u = np.searchsorted(uniq, src)
    v = np.searchsorted(uniq, dst)

    keep = u != v
    u, v = u[keep], v[keep]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    # dedupe undirected pairs via a single int64 key
    key = np.unique(lo * max(n, 1) + hi)
    lo, hi = key // max(n, 1), key % max(n, 1)

    rows = np.concatenate([lo, hi])
    cols = np.concatenate([hi, lo])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, rows + 1, 1)
    np.cumsum(indptr, out=indptr)
    return Graph(indptr=indptr, indices=cols.astype(np.int64), labels=uniq, directed_input=directed_input)


def parse_edge_list(stream: TextIO | str | Path, directed_input: bool = False) -> Graph:
    """Parse an edge list from an open text stream or a file path.

    Raises:
        ParseError: a data line has fewer than two tokens or a non-integer
            token among the first two; the message carries the line number.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, encoding="utf-8") as fh:
            return parse_edge_list(fh, directed_input)

    src: list[int] = []
    dst: list[int] = []
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        parts = s.split()
        if len(parts) < 2:
            raise ParseError(f"expected two node ids, got {s!r}", lineno)
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer node id in {s!r}", lineno) from None
        src.append(a)
        dst.append(b)
    return from_edges(src, dst, directed_input=directed_input)


def parse_edge_text(text: str, directed_input: bool = False) -> Graph:
    return parse_edge_list(io.StringIO(text), directed_input)


def write_edge_list(g: Graph, stream: TextIO) -> None:
    """Serialize each undirected edge once, using original labels.

    Isolated nodes cannot be expressed in the format and are lost.
    """
    labels = g.labels
    for u, v in g.edges():
        stream.write(f"{labels[u]}\t{labels[v]}\n")


def to_edge_text(g: Graph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()
