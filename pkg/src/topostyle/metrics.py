"""Bottleneck and 1-Wasserstein distances between persistence barcodes.

Both distances match intervals of two barcodes against each other or
against the diagonal; an unmatched interval ``[b, d)`` is paired with its
projection ``((b+d)/2, (b+d)/2)``. Essential classes are capped at
``persistence.CAP`` before any cost is computed, so every distance is
finite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import linear_sum_assignment

from .errors import IntegrityError
from .persistence import CAP, Barcode

METRICS = ("bottleneck", "wasserstein1")


@dataclass(frozen=True)
class Matching:
    """Index pairs ``(i, j)`` of matched points plus points sent to the diagonal."""

    pairs: list[tuple[int, int]] = field(default_factory=list)
    unmatched_a: list[int] = field(default_factory=list)
    unmatched_b: list[int] = field(default_factory=list)


def diagram(barcode: Barcode | np.ndarray, cap: float = CAP) -> np.ndarray:
    """Finite ``(k, 2)`` birth/death array, essential deaths set to ``cap``."""
    if isinstance(barcode, Barcode):
        return barcode.capped(cap)
    pts = np.asarray(barcode, dtype=np.float64).reshape(-1, 2).copy()
    pts[np.isinf(pts[:, 1]), 1] = cap
    return pts


def diagonal_cost(points: np.ndarray, norm: str = "Linf") -> np.ndarray | float:
    """Distance from ``(birth, death)`` points to their diagonal projection.

    ``Linf`` gives half the persistence, ``L1`` the full persistence.
    """
    pts = np.asarray(points, dtype=np.float64)
    persistence = pts[..., 1] - pts[..., 0]
    if norm == "Linf":
        out = persistence / 2.0
    elif norm == "L1":
        out = persistence
    else:
        raise ValueError(f"unknown norm {norm!r}")
    return float(out) if np.ndim(out) == 0 else out


def _check_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, Barcode) and isinstance(b, Barcode) and a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return diagram(a), diagram(b)


def _linf_costs(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    return np.maximum(
        np.abs(pa[:, None, 0] - pb[None, :, 0]), np.abs(pa[:, None, 1] - pb[None, :, 1])
    )


def _l1_costs(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    return np.abs(pa[:, None, 0] - pb[None, :, 0]) + np.abs(pa[:, None, 1] - pb[None, :, 1])


@njit(cache=True)
def _hopcroft_karp(n_left, n_right, indptr, indices):
    """Maximum-cardinality bipartite matching on a CSR adjacency."""
    INF = n_left + n_right + 1
    match_l = np.full(n_left, -1, dtype=np.int64)
    match_r = np.full(n_right, -1, dtype=np.int64)
    dist = np.empty(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    stack = np.empty(n_left, dtype=np.int64)
    cursor = np.empty(n_left, dtype=np.int64)
    size = 0
    while True:
        # BFS from free left vertices builds the layered graph
        head = tail = 0
        for u in range(n_left):
            if match_l[u] < 0:
                dist[u] = 0
                queue[tail] = u
                tail += 1
            else:
                dist[u] = INF
        found = False
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                w = match_r[indices[k]]
                if w < 0:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue[tail] = w
                    tail += 1
        if not found:
            break
        # iterative DFS along layers for vertex-disjoint augmenting paths
        for u in range(n_left):
            cursor[u] = indptr[u]
        for root in range(n_left):
            if match_l[root] >= 0:
                continue
            depth = 0
            stack[0] = root
            while depth >= 0:
                u = stack[depth]
                advanced = False
                while cursor[u] < indptr[u + 1]:
                    v = indices[cursor[u]]
                    cursor[u] += 1
                    w = match_r[v]
                    if w < 0:
                        # augment along the stack
                        for d in range(depth, -1, -1):
                            x = stack[d]
                            nxt = match_l[x]
                            match_l[x] = v
                            match_r[v] = x
                            v = nxt
                        size += 1
                        depth = -1
                        advanced = True
                        break
                    if dist[w] == dist[u] + 1:
                        depth += 1
                        stack[depth] = w
                        advanced = True
                        break
                if not advanced:
                    dist[u] = INF
                    depth -= 1
    return size, match_l


def max_bipartite_matching(adjacency: np.ndarray) -> tuple[int, np.ndarray]:
    """Maximum matching of a boolean ``(n_left, n_right)`` adjacency matrix.

    Returns the matching size and, per left vertex, its partner or -1.
    """
    adjacency = np.asarray(adjacency, dtype=bool)
    n_left, n_right = adjacency.shape
    rows, cols = np.nonzero(adjacency)
    indptr = np.zeros(n_left + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_left), out=indptr[1:])
    return _hopcroft_karp(n_left, n_right, indptr, cols.astype(np.int64))


def _bottleneck_feasible(cost, diag_a, diag_b, eps) -> bool:
    must_a = diag_a > eps
    must_b = diag_b > eps
    allowed = cost <= eps
    # A matching covering must_a and one covering must_b combine into one
    # covering both (Mendelsohn-Dulmage); the rest go to the diagonal.
    if must_a.any():
        size, _ = max_bipartite_matching(allowed[must_a])
        if size < must_a.sum():
            return False
    if must_b.any():
        size, _ = max_bipartite_matching(allowed[:, must_b].T)
        if size < must_b.sum():
            return False
    return True


def _augmented(pa, pb, pair_cost, diag_a, diag_b, forbidden=np.inf) -> np.ndarray:
    """(n+m) square cost matrix; rows are A then B's diagonal copies."""
    n, m = len(pa), len(pb)
    big = np.zeros((n + m, m + n))
    big[:n, :m] = pair_cost
    big[:n, m:] = forbidden
    big[:n, m:][np.arange(n), np.arange(n)] = diag_a
    big[n:, :m] = forbidden
    big[n:, :m][np.arange(m), np.arange(m)] = diag_b
    return big


def _to_matching(rows, cols, n, m) -> Matching:
    pairs, un_a, un_b = [], [], []
    for r, c in zip(rows.tolist(), cols.tolist()):
        if r < n and c < m:
            pairs.append((r, c))
        elif r < n:
            un_a.append(r)
        elif c < m:
            un_b.append(c)
    return Matching(sorted(pairs), sorted(un_a), sorted(un_b))


def bottleneck(a, b, return_matching: bool = False):
    """Exact bottleneck distance between two barcodes.

    The candidate values (pairwise L-infinity costs and diagonal costs) are
    sorted and binary-searched for the smallest ``eps`` admitting a matching
    where every pair and every diagonal assignment costs at most ``eps``.
    """
    pa, pb = _check_pair(a, b)
    n, m = len(pa), len(pb)
    diag_a = diagonal_cost(pa, "Linf") if n else np.empty(0)
    diag_b = diagonal_cost(pb, "Linf") if m else np.empty(0)
    cost = _linf_costs(pa, pb)
    candidates = np.unique(np.concatenate([[0.0], cost.ravel(), diag_a, diag_b]))
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _bottleneck_feasible(cost, diag_a, diag_b, candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    eps = float(candidates[lo])
    if not return_matching:
        return eps
    # any perfect matching using only edges of cost <= eps is optimal
    big = _augmented(pa, pb, cost, diag_a, diag_b)
    indicator = np.where(big <= eps, 0.0, 1.0)
    rows, cols = linear_sum_assignment(indicator)
    return eps, _to_matching(rows, cols, n, m)


def prune(points: np.ndarray, min_persistence: float) -> np.ndarray:
    """Drop points whose persistence is below ``min_persistence``."""
    return points[(points[:, 1] - points[:, 0]) >= min_persistence]


def wasserstein1(a, b, min_persistence: float | None = None, return_matching: bool = False):
    """Exact 1-Wasserstein distance with L1 ground metric.

    Solved as a min-cost perfect assignment on the augmented
    ``(n+m) x (n+m)`` matrix where each point may also take its own
    diagonal projection and diagonal-to-diagonal pairs cost nothing.
    ``min_persistence`` optionally drops short intervals first.
    """
    pa, pb = _check_pair(a, b)
    if min_persistence is not None:
        pa, pb = prune(pa, min_persistence), prune(pb, min_persistence)
    n, m = len(pa), len(pb)
    if n + m == 0:
        return (0.0, Matching()) if return_matching else 0.0
    big = _augmented(pa, pb, _l1_costs(pa, pb), diagonal_cost(pa, "L1"), diagonal_cost(pb, "L1"))
    rows, cols = linear_sum_assignment(big)
    total = float(big[rows, cols].sum())
    if return_matching:
        return total, _to_matching(rows, cols, n, m)
    return total


def distance(a, b, metric: str, **kwargs) -> float:
    if metric == "bottleneck":
        return bottleneck(a, b)
    if metric == "wasserstein1":
        return wasserstein1(a, b, **kwargs)
    raise ValueError(f"unknown metric {metric!r}")


def cross_average(dmat, ids_a, ids_b) -> float:
    """Mean of the ``|A| * |B|`` cross distances, looked up from ``dmat``."""
    ia = [dmat.index_of(i) for i in ids_a]
    ib = [dmat.index_of(i) for i in ids_b]
    if not ia or not ib:
        raise ValueError("both samples must be non-empty")
    block = dmat.values[np.ix_(ia, ib)]
    if np.isnan(block).any():
        raise IntegrityError("distance matrix has missing entries")
    return float(block.mean())
