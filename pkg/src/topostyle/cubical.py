"""Sublevel-set cubical complexes on pixel grids.

Pixels are vertices, 4-adjacent pixel pairs are edges and every 2x2 block
of pixels spans a square. A cell enters the filtration at the largest pixel
value among its corners, so the cells with value ``<= t`` form exactly the
complex built from the black pixels of ``binarize(grid, t)``.

Cell ids are assigned in row-major creation order: vertices first (one per
pixel), then edges (for each pixel, its right edge then its down edge),
then squares (by top-left pixel).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .imaging import check_grid


def binarize(grid: np.ndarray, t: int) -> np.ndarray:
    """Boolean grid that is True (black) where the pixel value is ``<= t``."""
    if not 0 <= t <= 255:
        raise ValueError(f"threshold must lie in [0, 255], got {t}")
    return check_grid(grid) <= t


@lru_cache(maxsize=16)
def _topology(height: int, width: int):
    """Edge endpoints and square boundaries for a grid; depends only on shape."""
    pix = np.arange(height * width, dtype=np.int64).reshape(height, width)

    # (source pixel, kind) keys give the row-major creation order
    right_src = pix[:, :-1].ravel()
    down_src = pix[:-1, :].ravel()
    src = np.concatenate([right_src, down_src])
    kind = np.concatenate([np.zeros(right_src.size, np.int64), np.ones(down_src.size, np.int64)])
    dst = np.concatenate([right_src + 1, down_src + width])
    order = np.lexsort((kind, src))
    endpoints = np.stack([src[order], dst[order]], axis=1)

    rank = np.empty(order.size, dtype=np.int64)
    rank[order] = np.arange(order.size)
    right_id = np.full((height, width), -1, dtype=np.int64)
    down_id = np.full((height, width), -1, dtype=np.int64)
    right_id[:, :-1] = rank[: right_src.size].reshape(height, width - 1)
    down_id[:-1, :] = rank[right_src.size:].reshape(height - 1, width)

    if height > 1 and width > 1:
        top = right_id[:-1, :-1]
        bottom = right_id[1:, :-1]
        left = down_id[:-1, :-1]
        right = down_id[:-1, 1:]
        square_edges = np.stack([top, left, right, bottom], axis=-1).reshape(-1, 4)
        corners = pix[:-1, :-1].ravel()
        square_vertices = np.stack(
            [corners, corners + 1, corners + width, corners + width + 1], axis=1
        )
    else:
        square_edges = np.empty((0, 4), dtype=np.int64)
        square_vertices = np.empty((0, 4), dtype=np.int64)

    for arr in (endpoints, square_edges, square_vertices):
        arr.setflags(write=False)
    return endpoints, square_edges, square_vertices


@dataclass(frozen=True)
class FilteredCubicalComplex:
    """A filtered 2D cubical complex in the V-construction.

    Attributes
    ----------
    shape : (height, width) of the source grid
    vertex_values : (V,) filtration value of each vertex (the pixel value)
    edge_endpoints : (E, 2) vertex ids of each edge
    edge_values : (E,) max of the two endpoint values
    square_edges : (F, 4) edge ids bounding each square
    square_vertices : (F, 4) corner vertex ids of each square
    square_values : (F,) max of the four corner values
    """

    shape: tuple[int, int]
    vertex_values: np.ndarray
    edge_endpoints: np.ndarray
    edge_values: np.ndarray
    square_edges: np.ndarray
    square_vertices: np.ndarray
    square_values: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.vertex_values.size

    @property
    def n_edges(self) -> int:
        return self.edge_values.size

    @property
    def n_squares(self) -> int:
        return self.square_values.size

    def cell_id(self, dimension: int, index: int) -> int:
        """Global row-major creation id of the ``index``-th cell of a dimension."""
        offset = (0, self.n_vertices, self.n_vertices + self.n_edges)[dimension]
        return offset + index

    @cached_property
    def edge_order(self) -> np.ndarray:
        """Edge indices sorted by (value, id)."""
        return np.argsort(self.edge_values, kind="stable")

    def sublevel(self, t: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Membership masks (vertices, edges, squares) of the complex at ``t``."""
        return self.vertex_values <= t, self.edge_values <= t, self.square_values <= t


def build_filtration(grid: np.ndarray) -> FilteredCubicalComplex:
    grid = check_grid(grid)
    h, w = grid.shape
    endpoints, square_edges, square_vertices = _topology(h, w)
    values = grid.ravel()
    edge_values = np.maximum(values[endpoints[:, 0]], values[endpoints[:, 1]])
    if len(square_vertices):
        square_values = values[square_vertices].max(axis=1)
    else:
        square_values = np.empty(0, dtype=np.uint8)
    for arr in (values, edge_values, square_values):
        arr.setflags(write=False)
    return FilteredCubicalComplex(
        shape=(h, w),
        vertex_values=values,
        edge_endpoints=endpoints,
        edge_values=edge_values,
        square_edges=square_edges,
        square_vertices=square_vertices,
        square_values=square_values,
    )
