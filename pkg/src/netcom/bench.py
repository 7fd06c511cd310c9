"""Side-by-side comparison of the exact, M-tree and LSH backends.

Every row runs two stages on the same embedding and seed:

* ``nn``: nearest *other* node search for a seeded sample of query nodes,
  through an index over all nodes (exact = linear scan). Counts include
  index construction.
* ``detect``: k-central community detection with the backend.

``total_evaluations`` is the sum of both stages. ``nn_recall`` is the
fraction of sampled queries whose answer equals the exact answer.
"""

from __future__ import annotations

import time
import traceback
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .embed import Embedding
from .graph import Graph
from .kcentral import Backend, detect_communities
from .lsh import LshParams, ann_query, build_lsh
from .mtree import DEFAULT_LEAF_CAPACITY, build_mtree, nn_query
from .quality import quality_report

DEFAULT_QUERIES = 1000


@dataclass
class BenchRow:
    backend: str
    wall_ms: int = 0
    nn_evaluations: int = 0
    detect_evaluations: int = 0
    total_evaluations: int = 0
    nn_recall: float | None = None
    lsh_fallbacks: int = 0
    modularity: float | None = None
    conductance_min: float | None = None
    conductance_mean: float | None = None
    conductance_max: float | None = None
    iterations: int = 0
    relative_evaluations: float | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def sample_queries(n: int, count: int | None, seed: int) -> np.ndarray:
    if count is None or count >= n:
        return np.arange(n)
    return np.sort(np.random.default_rng(seed).choice(n, size=count, replace=False))


def exact_neighbors(emb: Embedding, queries: np.ndarray) -> tuple[np.ndarray, int]:
    """Nearest other node for each query by linear scan; ``(ids, evaluations)``."""
    out = np.empty(len(queries), dtype=np.int64)
    cols = np.arange(len(emb))
    for lo in range(0, len(queries), 256):
        q = queries[lo : lo + 256]
        block = emb.pairwise(q, cols)
        block[np.arange(len(q)), q] = np.inf
        out[lo : lo + 256] = np.argmin(block, axis=1)
    return out, len(queries) * (len(emb) - 1)


def nn_workload(
    emb: Embedding,
    backend: Backend | str,
    queries: np.ndarray,
    *,
    lsh: LshParams | None = None,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    seed: int = 0,
) -> tuple[np.ndarray, int, int]:
    """Answer every query through ``backend``; ``(ids, evaluations, lsh_fallbacks)``."""
    backend = Backend(backend)
    if backend is Backend.EXACT:
        ids, evals = exact_neighbors(emb, queries)
        return ids, evals, 0
    ids = np.empty(len(queries), dtype=np.int64)
    fallbacks = 0
    if backend is Backend.MTREE:
        tree = build_mtree(emb.vectors, emb.cfg, leaf_capacity, seed)
        evals = tree.build_evaluations
        for i, q in enumerate(queries.tolist()):
            oid, _, st = nn_query(tree, emb[q], exclude=q)
            ids[i] = oid
            evals += st.distance_evaluations
    else:
        idx = build_lsh(emb.vectors, emb.cfg, lsh or LshParams(seed=seed))
        evals = idx.build_evaluations
        n = len(emb)
        for i, q in enumerate(queries.tolist()):
            oid, _, scanned = ann_query(idx, emb[q], exclude=q)
            ids[i] = oid
            evals += idx.pivot_count + scanned
            # a full scan means the bucket union held nothing but the query
            fallbacks += scanned == n - 1 and n > 2
    return ids, evals, fallbacks


def benchmark_compare(
    emb: Embedding,
    backends: Sequence[Backend | str],
    k: int,
    *,
    graph: Graph | None = None,
    queries: int | None = DEFAULT_QUERIES,
    seed: int = 0,
    lsh: LshParams | None = None,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    max_iters: int = 100,
    threads: int | None = None,
) -> list[BenchRow]:
    """One :class:`BenchRow` per backend; a failing backend yields a row with ``error`` set."""
    if not backends:
        raise ValueError("at least one backend is required")
    q = sample_queries(len(emb), queries, seed)
    truth, _ = exact_neighbors(emb, q)
    rows = []
    for b in backends:
        row = BenchRow(backend=str(getattr(b, "value", b)))
        t0 = time.perf_counter()
        try:
            ids, nn_evals, fallbacks = nn_workload(
                emb, b, q, lsh=lsh, leaf_capacity=leaf_capacity, seed=seed
            )
            part = detect_communities(
                emb, k, b, seed, max_iters, lsh=lsh, leaf_capacity=leaf_capacity, threads=threads
            )
            row.nn_evaluations = int(nn_evals)
            row.lsh_fallbacks = int(fallbacks)
            row.nn_recall = float(np.mean(ids == truth)) if len(q) else None
            row.detect_evaluations = int(part.distance_evaluations)
            row.total_evaluations = row.nn_evaluations + row.detect_evaluations
            row.iterations = part.iterations
            if graph is not None:
                rep = quality_report(graph, part, backend=row.backend)
                row.modularity = rep.modularity
                row.conductance_min = rep.conductance_min
                row.conductance_mean = rep.conductance_mean
                row.conductance_max = rep.conductance_max
        except Exception as exc:  # one broken backend must not sink the others
            row.error = f"{type(exc).__name__}: {exc}"
            traceback.print_exc()
        row.wall_ms = int(round((time.perf_counter() - t0) * 1000))
        rows.append(row)

    if len(rows) > 1:
        ref = next((r for r in rows if r.backend == Backend.EXACT.value and not r.error), rows[0])
        for r in rows:
            if not r.error and ref.total_evaluations:
                r.relative_evaluations = r.total_evaluations / ref.total_evaluations
    return rows


_COLUMNS = [
    ("backend", "{}"),
    ("wall_ms", "{}"),
    ("nn_evaluations", "{}"),
    ("detect_evaluations", "{}"),
    ("total_evaluations", "{}"),
    ("nn_recall", "{:.3f}"),
    ("modularity", "{:.4f}"),
    ("conductance_mean", "{:.4f}"),
    ("conductance_min", "{:.4f}"),
    ("conductance_max", "{:.4f}"),
]


def format_table(rows: Sequence[BenchRow]) -> str:
    cols = list(_COLUMNS)
    if len(rows) > 1:
        cols.append(("relative_evaluations", "{:.3f}"))
    if any(r.error for r in rows):
        cols.append(("error", "{}"))
    cells = [[name for name, _ in cols]]
    for r in rows:
        line = []
        for name, fmt in cols:
            v = getattr(r, name)
            line.append("-" if v is None else fmt.format(v))
        cells.append(line)
    widths = [max(len(c[i]) for c in cells) for i in range(len(cols))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(line, widths)) for line in cells)
