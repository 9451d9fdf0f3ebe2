"""Uniform Cartesian meshes with an optional rectangular hole.

Cells are numbered row-major over the active part of the ``nx x ny``
lattice.  Edges are numbered vertical block first (normal along x), then
horizontal block, each row-major.  Unknowns are all cells, then all edges.

Every cell stores its four edges in the local order ``W, E, S, N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMesh, HoleNotGridAligned

W, E, S, N = 0, 1, 2, 3

#: Outward unit normal of each local edge.
LOCAL_NORMALS = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])
#: Local index of the same edge seen from the neighbouring cell.
OPPOSITE = np.array([E, W, N, S])
#: Normal axis of each local edge (0: vertical edge, 1: horizontal edge).
LOCAL_AXIS = np.array([0, 0, 1, 1])
#: The two edges of a cell orthogonal to a given local edge.
CROSS = np.array([[N, S], [N, S], [E, W], [E, W]])

_ALIGN_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CartesianMesh:
    """Immutable Cartesian mesh over ``bounds = (x0, x1, y0, y1)``.

    Attributes
    ----------
    active : (ny, nx) bool
        Active-cell mask of the lattice.
    cell_ij : (nc, 2) int
        Lattice indices ``(i, j)`` of each active cell.
    cell_index : (ny, nx) int
        Inverse of ``cell_ij``; ``-1`` marks inactive lattice cells.
    cell_edges : (nc, 4) int
        Edge numbers in local order ``W, E, S, N``.
    edge_cells : (ne, 2) int
        Cells on the negative and positive side of each edge (left/below,
        right/above); ``-1`` where no active cell exists.
    edge_axis : (ne,) int
        0 for vertical edges, 1 for horizontal edges.
    edge_mid : (ne, 2) float
        Edge midpoints.
    """

    nx: int
    ny: int
    bounds: tuple[float, float, float, float]
    active: np.ndarray
    cell_ij: np.ndarray
    cell_index: np.ndarray
    cell_edges: np.ndarray
    edge_cells: np.ndarray
    edge_axis: np.ndarray
    edge_mid: np.ndarray
    n_vertical: int
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def hx(self) -> float:
        return (self.bounds[1] - self.bounds[0]) / self.nx

    @property
    def hy(self) -> float:
        return (self.bounds[3] - self.bounds[2]) / self.ny

    @property
    def n_cells(self) -> int:
        return len(self.cell_ij)

    @property
    def n_edges(self) -> int:
        return len(self.edge_cells)

    @property
    def n_dofs(self) -> int:
        return self.n_cells + self.n_edges

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def cell_centers(self) -> np.ndarray:
        if "centers" not in self._cache:
            x0, _, y0, _ = self.bounds
            c = np.empty((self.n_cells, 2))
            c[:, 0] = x0 + (self.cell_ij[:, 0] + 0.5) * self.hx
            c[:, 1] = y0 + (self.cell_ij[:, 1] + 0.5) * self.hy
            self._cache["centers"] = c
        return self._cache["centers"]

    @property
    def edge_length(self) -> np.ndarray:
        return np.where(self.edge_axis == 0, self.hy, self.hx)

    @property
    def local_edge_length(self) -> np.ndarray:
        """|sigma| for the local edges W, E, S, N."""
        return np.array([self.hy, self.hy, self.hx, self.hx])

    @property
    def local_distance(self) -> np.ndarray:
        """Orthogonal distance d_{K,sigma} from the centre to W, E, S, N."""
        return np.array([self.hx, self.hx, self.hy, self.hy]) / 2.0

    @property
    def interior_edges(self) -> np.ndarray:
        return np.flatnonzero((self.edge_cells >= 0).all(axis=1))

    @property
    def boundary_edges(self) -> np.ndarray:
        return np.flatnonzero((self.edge_cells < 0).any(axis=1))

    @property
    def neighbors(self) -> np.ndarray:
        """(nc, 4) cell across each local edge, ``-1`` on the boundary."""
        if "neighbors" not in self._cache:
            ec = self.edge_cells[self.cell_edges]  # (nc, 4, 2)
            own = np.arange(self.n_cells)[:, None]
            nb = np.where(ec[..., 0] == own, ec[..., 1], ec[..., 0])
            self._cache["neighbors"] = nb
        return self._cache["neighbors"]

    @property
    def cell_dofs(self) -> np.ndarray:
        """(nc, 5) global unknowns ``[c_K, c_W, c_E, c_S, c_N]`` of each cell."""
        if "dofs" not in self._cache:
            d = np.empty((self.n_cells, 5), dtype=np.int64)
            d[:, 0] = np.arange(self.n_cells)
            d[:, 1:] = self.cell_edges + self.n_cells
            self._cache["dofs"] = d
        return self._cache["dofs"]

    def edge_dof(self, e: int) -> int:
        return self.n_cells + int(e)

    def edge_normal(self, e: int, k: int) -> np.ndarray:
        """Unit normal of edge ``e`` pointing out of cell ``k``."""
        local = int(np.flatnonzero(self.cell_edges[k] == e)[0])
        return LOCAL_NORMALS[local].copy()

    def local_index(self, k: int, e: int) -> int:
        hits = np.flatnonzero(self.cell_edges[k] == e)
        if hits.size == 0:
            raise ValueError(f"edge {e} is not an edge of cell {k}")
        return int(hits[0])

    def cross_edges(self, k: int, e: int) -> tuple[int, int]:
        """Edges of cell ``k`` orthogonal to its edge ``e``.

        Returns ``(north, south)`` for a vertical edge and ``(east, west)``
        for a horizontal one.
        """
        a, b = CROSS[self.local_index(k, e)]
        return int(self.cell_edges[k, a]), int(self.cell_edges[k, b])

    def opposite_cell(self, e: int, k: int) -> int | None:
        """Cell sharing edge ``e`` with ``k``, or None on the boundary."""
        self.local_index(k, e)
        a, b = self.edge_cells[e]
        other = b if a == k else a
        return None if other < 0 else int(other)

    def cell_at(self, i: int, j: int) -> int:
        return int(self.cell_index[j, i])


def _aligned(v: float, origin: float, h: float) -> int:
    q = (v - origin) / h
    r = round(q)
    if abs(q - r) > _ALIGN_TOL:
        raise HoleNotGridAligned(f"hole coordinate {v} is not on a grid line (h={h})")
    return int(r)


def build_mesh(nx: int, ny: int, bounds=(0.0, 1.0, 0.0, 1.0), hole=None) -> CartesianMesh:
    """Build a uniform ``nx x ny`` mesh, deactivating the cells of ``hole``.

    ``hole = (a, b, c, d)`` removes ``[a, b] x [c, d]``; its sides must
    coincide with grid lines.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be positive")
    x0, x1, y0, y1 = map(float, bounds)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("bounds must describe a non-degenerate rectangle")
    hx, hy = (x1 - x0) / nx, (y1 - y0) / ny

    active = np.ones((ny, nx), dtype=bool)
    if hole is not None:
        a, b, c, d = map(float, hole)
        i0, i1 = _aligned(a, x0, hx), _aligned(b, x0, hx)
        j0, j1 = _aligned(c, y0, hy), _aligned(d, y0, hy)
        active[max(j0, 0):max(j1, 0), max(i0, 0):max(i1, 0)] = False
    if not active.any():
        raise EmptyMesh("no active cell remains")

    jj, ii = np.nonzero(active)  # row-major
    nc = len(ii)
    cell_index = -np.ones((ny, nx), dtype=np.int64)
    cell_index[jj, ii] = np.arange(nc)

    # vertical edges: lattice (ny, nx + 1), between cells (i-1, j) and (i, j)
    pad = -np.ones((ny, nx + 2), dtype=np.int64)
    pad[:, 1:-1] = cell_index
    v_left, v_right = pad[:, :-1], pad[:, 1:]
    v_keep = (v_left >= 0) | (v_right >= 0)
    v_id = -np.ones((ny, nx + 1), dtype=np.int64)
    n_v = int(v_keep.sum())
    v_id[v_keep] = np.arange(n_v)

    # horizontal edges: lattice (ny + 1, nx), between cells (i, j-1) and (i, j)
    pad = -np.ones((ny + 2, nx), dtype=np.int64)
    pad[1:-1, :] = cell_index
    h_below, h_above = pad[:-1, :], pad[1:, :]
    h_keep = (h_below >= 0) | (h_above >= 0)
    h_id = -np.ones((ny + 1, nx), dtype=np.int64)
    n_h = int(h_keep.sum())
    h_id[h_keep] = n_v + np.arange(n_h)

    edge_cells = np.concatenate(
        [
            np.stack([v_left[v_keep], v_right[v_keep]], axis=1),
            np.stack([h_below[h_keep], h_above[h_keep]], axis=1),
        ]
    )
    vj, vi = np.nonzero(v_keep)
    hj, hi = np.nonzero(h_keep)
    edge_mid = np.concatenate(
        [
            np.stack([x0 + vi * hx, y0 + (vj + 0.5) * hy], axis=1),
            np.stack([x0 + (hi + 0.5) * hx, y0 + hj * hy], axis=1),
        ]
    )
    edge_axis = np.concatenate([np.zeros(n_v, dtype=np.int64), np.ones(n_h, dtype=np.int64)])

    cell_edges = np.stack(
        [v_id[jj, ii], v_id[jj, ii + 1], h_id[jj, ii], h_id[jj + 1, ii]], axis=1
    )

    return CartesianMesh(
        nx=nx,
        ny=ny,
        bounds=(x0, x1, y0, y1),
        active=active,
        cell_ij=np.stack([ii, jj], axis=1),
        cell_index=cell_index,
        cell_edges=cell_edges,
        edge_cells=edge_cells,
        edge_axis=edge_axis,
        edge_mid=edge_mid,
        n_vertical=n_v,
    )
