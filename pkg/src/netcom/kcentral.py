"""k-central community detection on an embedded graph.

Centers are seeded by farthest-first traversal. Each iteration assigns every
node to its nearest center and then moves each center to its community's
medoid (the member with the smallest total distance to the other members).
The objective is the sum of node-to-center distances; both steps can only
lower it, and the loop stops once an iteration leaves it unchanged.

Tie rules: a node equidistant from several centers joins the community with
the smallest id; a medoid tie goes to the smallest node id.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .embed import Embedding
from .errors import DomainError
from .lsh import LshParams, ann_query, build_lsh
from .mtree import DEFAULT_LEAF_CAPACITY, build_mtree, nn_query

# below this many centers, assignment scans the centers directly for every backend
SCAN_CROSSOVER = 32
MEDOID_SAMPLE = 4096
_ROW_CHUNK = 1024


class Backend(str, Enum):
    EXACT = "exact"
    MTREE = "mtree"
    LSH = "lsh"


@dataclass(frozen=True)
class Partition:
    assignment: np.ndarray
    centers: tuple[int, ...]
    cost: float
    iterations: int = 0
    history: tuple[float, ...] = ()
    distance_evaluations: int = 0

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "centers", tuple(int(c) for c in self.centers))

    @property
    def k(self) -> int:
        return len(self.centers)

    def communities(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for u, c in enumerate(self.assignment.tolist()):
            out[c].append(u)
        return out

    def same_as(self, other: Partition) -> bool:
        return self.centers == other.centers and np.array_equal(self.assignment, other.assignment)


@dataclass
class _Options:
    backend: Backend = Backend.EXACT
    lsh: LshParams = field(default_factory=LshParams)
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY
    seed: int = 0
    threads: int | None = None


def default_threads() -> int:
    env = os.environ.get("NETCOM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunked(n: int, size: int = _ROW_CHUNK) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def _map(fn, items, threads: int | None):
    # results come back in input order, so output is independent of thread count
    threads = threads or default_threads()
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def farthest_first(emb: Embedding, k: int, seed: int = 0) -> tuple[list[int], list[float]]:
    """Farthest-first traversal; returns centers and their insertion radii.

    ``radii[j]`` is the distance of center ``j + 1`` to its nearest
    predecessor, so ``len(radii) == k - 1``.
    """
    n = len(emb)
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    first = int(np.random.default_rng(seed).integers(n))
    centers = [first]
    radii: list[float] = []
    mind = emb.distances_from(first).copy()
    mind[first] = -np.inf
    for _ in range(1, k):
        nxt = int(np.argmax(mind))
        radii.append(float(mind[nxt]))
        centers.append(nxt)
        np.minimum(mind, emb.distances_from(nxt), out=mind)
        mind[centers] = -np.inf
    return centers, radii


def farthest_first_init(emb: Embedding, k: int, seed: int = 0) -> list[int]:
    return farthest_first(emb, k, seed)[0]


def select_k(emb: Embedding, k_max: int, seed: int = 0, drop_threshold: float = 0.5) -> int:
    """Smallest k after which the farthest-first insertion radius drops sharply.

    With insertion radii ``r_1..r_kmax`` (``r_1`` is taken equal to ``r_2``,
    the first center having no predecessor), returns the smallest ``k`` with
    ``r_{k+1} < drop_threshold * r_k`` or ``r_{k+1} == 0``; ``k_max`` if none.
    """
    n = len(emb)
    if not 1 <= k_max <= n:
        raise DomainError(f"k_max must lie in [1, {n}], got {k_max}")
    if k_max == 1:
        return 1
    _, radii = farthest_first(emb, k_max, seed)
    r = [radii[0], *radii]  # r[j - 1] is r_j
    for k in range(1, k_max):
        nxt, cur = r[k], r[k - 1]
        if nxt == 0 or nxt < drop_threshold * cur:
            return k
    return k_max


def _scan_assign(emb: Embedding, centers: Sequence[int], threads: int | None) -> tuple[np.ndarray, np.ndarray]:
    cols = np.asarray(centers, dtype=np.int64)

    def run(span):
        block = emb.pairwise(np.arange(*span), cols)
        a = np.argmin(block, axis=1)
        return a, block[np.arange(len(a)), a]

    parts = _map(run, _chunked(len(emb)), threads)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _index_assign(emb: Embedding, centers: Sequence[int], opts: _Options) -> tuple[np.ndarray, np.ndarray, int]:
    pts = [emb[c] for c in centers]
    n = len(emb)
    assign = np.empty(n, dtype=np.int64)
    dist = np.empty(n)
    if opts.backend is Backend.MTREE:
        tree = build_mtree(pts, emb.cfg, opts.leaf_capacity, opts.seed)
        evals = tree.build_evaluations
        for u in range(n):
            oid, d, st = nn_query(tree, emb[u])
            assign[u], dist[u] = oid, d
            evals += st.distance_evaluations
    else:
        idx = build_lsh(pts, emb.cfg, opts.lsh)
        evals = idx.build_evaluations
        for u in range(n):
            oid, d, scanned = ann_query(idx, emb[u])
            assign[u], dist[u] = oid, d
            evals += idx.pivot_count + scanned
    return assign, dist, evals


def _assign(emb: Embedding, centers: Sequence[int], opts: _Options, force_exact: bool = False):
    k = len(centers)
    if force_exact or opts.backend is Backend.EXACT or k <= SCAN_CROSSOVER:
        a, d = _scan_assign(emb, centers, opts.threads)
        evals = len(emb) * k
    else:
        a, d, evals = _index_assign(emb, centers, opts)
    # a center always belongs to its own community (only matters on exact ties)
    for i, c in enumerate(centers):
        a[c] = i
        d[c] = 0.0
    return a, d, evals


def _repair_empty(emb: Embedding, assignment: np.ndarray, centers: list[int]) -> int:
    """Give every empty community a new center taken from the largest one.

    The new center is the member of the largest community farthest from that
    community's center. Returns the number of distance evaluations spent.
    """
    evals = 0
    k = len(centers)
    while True:
        counts = np.bincount(assignment, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if len(empty) == 0:
            return evals
        big = int(np.argmax(counts))
        members = np.flatnonzero(assignment == big)
        members = members[members != centers[big]]
        if len(members) == 0:
            raise DomainError("cannot repair an empty community: no spare nodes")
        d = emb.pairwise(members, [centers[big]])[:, 0]
        evals += len(members)
        far = int(members[int(np.argmax(d))])
        centers[int(empty[0])] = far
        assignment[far] = int(empty[0])


def _medoid(emb: Embedding, members: np.ndarray, current: int, rng_seed, threads: int | None) -> tuple[int, float, int]:
    """Member minimizing total distance to the community; ``(medoid, total, evals)``.

    Above ``MEDOID_SAMPLE`` members only a seeded sample (plus the current
    center) is considered as candidates, still scored against every member,
    so the result is never worse than the current center.
    """
    if len(members) <= MEDOID_SAMPLE:
        cands = members
    else:
        rng = np.random.default_rng(rng_seed)
        cands = np.union1d(rng.choice(members, size=MEDOID_SAMPLE, replace=False), [current])

    def run(span):
        return emb.pairwise(members[span[0] : span[1]], cands).sum(axis=0)

    parts = _map(run, _chunked(len(members)), threads)
    totals = np.sum(parts, axis=0)
    best = int(np.argmin(totals))  # cands sorted ascending -> smallest id on ties
    return int(cands[best]), float(totals[best]), len(members) * len(cands)


def kcentral_iterate(
    emb: Embedding,
    centers: Sequence[int],
    backend: Backend | str = Backend.EXACT,
    previous: Partition | None = None,
    *,
    lsh: LshParams | None = None,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    seed: int = 0,
    threads: int | None = None,
) -> Partition:
    """One assignment pass followed by one recentering pass."""
    opts = _Options(Backend(backend), lsh or LshParams(seed=seed), leaf_capacity, seed, threads)
    return _iterate(emb, list(centers), opts, previous)


def _iterate(emb: Embedding, centers: list[int], opts: _Options, previous: Partition | None) -> Partition:
    if len(set(centers)) != len(centers) or not centers:
        raise DomainError("centers must be distinct and nonempty")
    if any(not 0 <= c < len(emb) for c in centers):
        raise DomainError("center id out of range")

    assignment, dist, evals = _assign(emb, centers, opts)
    if opts.backend is Backend.LSH and previous is not None and float(dist.sum()) > previous.cost:
        # approximate pass lost ground; redo this one exactly
        assignment, dist, extra = _assign(emb, centers, opts, force_exact=True)
        evals += extra
    centers = list(centers)
    evals += _repair_empty(emb, assignment, centers)

    new_centers = []
    cost = 0.0
    for i, c in enumerate(centers):
        members = np.flatnonzero(assignment == i)
        m, total, e = _medoid(emb, members, c, (opts.seed, i), opts.threads)
        new_centers.append(m)
        cost += total
        evals += e

    prev_hist = previous.history if previous is not None else ()
    prev_evals = previous.distance_evaluations if previous is not None else 0
    prev_iters = previous.iterations if previous is not None else 0
    return Partition(
        assignment,
        new_centers,
        cost,
        iterations=prev_iters + 1,
        history=(*prev_hist, cost),
        distance_evaluations=prev_evals + evals,
    )


def detect_communities(
    emb: Embedding,
    k: int,
    backend: Backend | str = Backend.EXACT,
    seed: int = 0,
    max_iters: int = 100,
    *,
    lsh: LshParams | None = None,
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY,
    threads: int | None = None,
    centers: Sequence[int] | None = None,
) -> Partition:
    """Run k-central from farthest-first seeds until the cost stops changing.

    ``Partition.history`` holds the cost after every iteration and
    ``distance_evaluations`` counts every distance computed, seeding included.
    """
    if max_iters < 1:
        raise DomainError("max_iters must be >= 1")
    opts = _Options(Backend(backend), lsh or LshParams(seed=seed), leaf_capacity, seed, threads)
    if centers is None:
        centers = farthest_first_init(emb, k, seed)
        init_evals = len(emb) * k
    else:
        centers = list(centers)
        init_evals = 0
        if len(centers) != k:
            raise DomainError("len(centers) must equal k")

    # placeholder carrying the seeding cost; its infinite cost never stops the loop
    p = Partition(np.zeros(len(emb), dtype=np.int64), centers, float("inf"), distance_evaluations=init_evals)
    for _ in range(max_iters):
        prev_cost = p.cost
        p = _iterate(emb, list(p.centers), opts, p)
        if p.cost == prev_cost:
            break
    return p


def cost(emb: Embedding, partition: Partition) -> float:
    """Sum of distances from every node to the center of its community."""
    total = 0.0
    a = partition.assignment
    for i, c in enumerate(partition.centers):
        members = np.flatnonzero(a == i)
        if len(members):
            total += float(emb.pairwise(members, [c]).sum())
    return total
