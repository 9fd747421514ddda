"""0- and 1-dimensional persistence of sublevel cubical filtrations.

Dimension 0 is a union-find sweep over the edges in filtration order
(elder rule). Dimension 1 is a column reduction of the square-to-edge
boundary matrix over Z/2; edge columns are never reduced because every
edge that can appear as a square pivot has already been classified by the
union-find pass.

Cells are ordered by (filtration value, dimension, creation id).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage

from .cubical import FilteredCubicalComplex, build_filtration
from .imaging import check_grid

ESSENTIAL = math.inf
CAP = 256


@dataclass(frozen=True, eq=False)
class Barcode:
    """Persistence intervals ``[birth, death)`` of one homological dimension.

    ``intervals`` is a ``(k, 2)`` float array sorted by (birth, death);
    an essential class has death ``ESSENTIAL`` (``inf``).
    """

    dimension: int
    intervals: np.ndarray

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=np.float64).reshape(-1, 2)
        if iv.size:
            iv = iv[np.lexsort((iv[:, 1], iv[:, 0]))]
            if np.any(iv[:, 1] <= iv[:, 0]):
                raise ValueError("every interval needs birth < death")
        iv.setflags(write=False)
        object.__setattr__(self, "intervals", iv)

    def __len__(self) -> int:
        return len(self.intervals)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Barcode):
            return NotImplemented
        return self.dimension == other.dimension and np.array_equal(self.intervals, other.intervals)

    @property
    def births(self) -> np.ndarray:
        return self.intervals[:, 0]

    @property
    def deaths(self) -> np.ndarray:
        return self.intervals[:, 1]

    @property
    def n_essential(self) -> int:
        return int(np.isinf(self.deaths).sum())

    def capped(self, cap: float = CAP) -> np.ndarray:
        """Intervals with essential deaths replaced by ``cap``."""
        iv = self.intervals.copy()
        iv[np.isinf(iv[:, 1]), 1] = cap
        return iv


@njit(cache=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True)
def _dim0_pairs(values, endpoints, edge_order):
    n = values.size
    parent = np.arange(n)
    births = np.empty(n, dtype=np.int64)
    deaths = np.empty(n, dtype=np.int64)
    k = 0
    for idx in range(edge_order.size):
        e = edge_order[idx]
        ru = _find(parent, endpoints[e, 0])
        rv = _find(parent, endpoints[e, 1])
        if ru == rv:
            continue
        # roots are the oldest vertex of their component: (value, id) decides
        if values[ru] < values[rv] or (values[ru] == values[rv] and ru < rv):
            old, young = ru, rv
        else:
            old, young = rv, ru
        parent[young] = old
        death = max(values[endpoints[e, 0]], values[endpoints[e, 1]])
        if values[young] < death:
            births[k] = values[young]
            deaths[k] = death
            k += 1
    return births[:k], deaths[:k]


@njit(cache=True)
def _xor_into(a, na, b, out):
    """Symmetric difference of sorted ``a[:na]`` and ``b`` written to ``out``."""
    nb = b.size
    i = j = k = 0
    while i < na and j < nb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif b[j] < a[i]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < na:
        out[k] = a[i]
        i += 1
        k += 1
    while j < nb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@njit(cache=True)
def _dim1_pairs(columns, square_order, n_edges):
    """Reduce square boundary columns (rows = edge filtration ranks).

    Returns (edge rank, square index) persistence pairs.
    """
    n_sq = square_order.size
    owner = np.full(n_edges, -1, dtype=np.int64)
    # append-only store of reduced columns
    store = np.empty(max(16, 4 * n_sq), dtype=np.int64)
    start = np.zeros(n_sq + 1, dtype=np.int64)
    used = 0
    work = np.empty(n_edges + 4, dtype=np.int64)
    scratch = np.empty(n_edges + 4, dtype=np.int64)
    pair_edge = np.empty(n_sq, dtype=np.int64)
    pair_square = np.empty(n_sq, dtype=np.int64)
    n_pairs = 0
    for pos in range(n_sq):
        s = square_order[pos]
        # insertion sort of the four boundary edges
        for r in range(4):
            v = columns[s, r]
            q = r
            while q > 0 and work[q - 1] > v:
                work[q] = work[q - 1]
                q -= 1
            work[q] = v
        n = 4
        while n > 0:
            o = owner[work[n - 1]]
            if o < 0:
                break
            n = _xor_into(work, n, store[start[o]:start[o + 1]], scratch)
            work, scratch = scratch, work
        if used + n > store.size:
            grown = np.empty(max(2 * store.size, used + n), dtype=np.int64)
            grown[:used] = store[:used]
            store = grown
        store[used:used + n] = work[:n]
        used += n
        start[pos + 1] = used
        if n > 0:
            owner[work[n - 1]] = pos
            pair_edge[n_pairs] = work[n - 1]
            pair_square[n_pairs] = s
            n_pairs += 1
    return pair_edge[:n_pairs], pair_square[:n_pairs]


def compute_barcode(complex: FilteredCubicalComplex, dimension: int) -> Barcode:
    """Persistence barcode of ``complex`` in dimension 0 or 1.

    Zero-length intervals are dropped. Dimension 0 always carries exactly one
    essential class; dimension 1 carries none since the full grid is
    contractible.
    """
    if dimension not in (0, 1):
        raise ValueError(f"dimension must be 0 or 1, got {dimension}")
    values = complex.vertex_values
    if dimension == 0:
        births, deaths = _dim0_pairs(values, complex.edge_endpoints, complex.edge_order)
        intervals = np.empty((births.size + 1, 2))
        intervals[:-1, 0] = births
        intervals[:-1, 1] = deaths
        intervals[-1] = (values.min(), ESSENTIAL)
        return Barcode(0, intervals)

    if complex.n_squares == 0:
        return Barcode(1, np.empty((0, 2)))
    edge_order = complex.edge_order
    edge_rank = np.empty_like(edge_order)
    edge_rank[edge_order] = np.arange(edge_order.size)
    columns = edge_rank[complex.square_edges]
    square_order = np.argsort(complex.square_values, kind="stable")
    ranks, squares = _dim1_pairs(columns, square_order, complex.n_edges)
    births = complex.edge_values[edge_order[ranks]]
    deaths = complex.square_values[squares]
    keep = births < deaths
    return Barcode(1, np.stack([births[keep], deaths[keep]], axis=1).astype(np.float64))


def barcodes(grid: np.ndarray) -> tuple[Barcode, Barcode]:
    """Dimension-0 and dimension-1 barcodes of an intensity grid."""
    cx = build_filtration(grid)
    return compute_barcode(cx, 0), compute_barcode(cx, 1)


def betti_at(barcode: Barcode, t: float) -> int:
    """Number of intervals ``[birth, death)`` that contain ``t``."""
    iv = barcode.intervals
    return int(np.count_nonzero((iv[:, 0] <= t) & (t < iv[:, 1])))


def betti_curve(barcode: Barcode) -> np.ndarray:
    """``betti_at`` evaluated at every threshold 0..255."""
    t = np.arange(256)[:, None]
    iv = barcode.intervals
    return ((iv[:, 0] <= t) & (t < iv[:, 1])).sum(axis=1)


_FOUR_NEIGHBOURS = ndimage.generate_binary_structure(2, 1)


def oracle_betti_curve(grid: np.ndarray, dimension: int) -> np.ndarray:
    """Betti numbers at every threshold, recomputed from scratch per threshold.

    b0 counts 4-connected components of the black pixels; b1 follows from the
    Euler characteristic ``b0 - b1 = V - E + F`` of the sublevel complex.
    Intended as a test oracle for small grids.
    """
    if dimension not in (0, 1):
        raise ValueError(f"dimension must be 0 or 1, got {dimension}")
    grid = check_grid(grid).astype(np.int64)
    curve = np.zeros(256, dtype=np.int64)
    for t in range(256):
        black = grid <= t
        _, b0 = ndimage.label(black, structure=_FOUR_NEIGHBOURS)
        if dimension == 0:
            curve[t] = b0
            continue
        n_v = int(black.sum())
        n_e = int((black[:, :-1] & black[:, 1:]).sum() + (black[:-1, :] & black[1:, :]).sum())
        n_f = int((black[:-1, :-1] & black[:-1, 1:] & black[1:, :-1] & black[1:, 1:]).sum())
        curve[t] = b0 - n_v + n_e - n_f
    return curve
