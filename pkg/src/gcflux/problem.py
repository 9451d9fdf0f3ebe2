"""Problem data for ``div(c V - Lambda grad c) = s`` and its cell/edge samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NotSymmetric, SingularTensor
from .mesh import LOCAL_AXIS, LOCAL_NORMALS, CartesianMesh

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

_GAUSS = 1.0 / np.sqrt(3.0)


def _zero(x, y):
    return np.zeros(np.broadcast(x, y).shape)


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficients, source and boundary data of a stationary problem.

    All callables are vectorised over coordinate arrays ``x, y``.
    ``diffusion`` returns ``(..., 2, 2)``, ``velocity`` returns ``(..., 2)``.
    ``neumann(x, y, n)`` receives the outward unit normal ``n`` and returns
    ``h = Lambda grad c . n``.  ``is_neumann(x, y)`` marks Neumann boundary
    edges by their midpoint; every other boundary edge is Dirichlet.
    """

    diffusion: Callable
    velocity: Callable
    source: Field = _zero
    dirichlet: Field = _zero
    neumann: Callable | None = None
    is_neumann: Callable | None = None
    mean_value: float | None = None
    exact: Field | None = None
    name: str = "custom"


@dataclass(frozen=True)
class EigenPair2x2:
    """Eigenvalues ``lam1 <= lam2`` and matching orthonormal eigenvectors."""

    lam1: float
    lam2: float
    u1: np.ndarray
    u2: np.ndarray


def eigen_2x2_batch(tensors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of symmetric ``(..., 2, 2)`` tensors.

    Returns ``(lam, U)`` with ``lam[..., 0] <= lam[..., 1]`` and the
    eigenvectors as the columns of ``U``.
    """
    t = np.asarray(tensors, dtype=float)
    a, b, b2, d = t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
    scale = np.maximum(np.abs(t).max(axis=(-2, -1)), np.finfo(float).tiny)
    if np.any(np.abs(b - b2) > 1e-14 * scale):
        raise NotSymmetric("diffusion tensor is not symmetric")
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    lam_hi = mean + rad
    det = a * d - b * b
    # small eigenvalue via the determinant avoids cancellation in mean - rad
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_lo = np.where(lam_hi != 0.0, det / lam_hi, mean - rad)
    # rounding in det can lift a double eigenvalue above lam_hi
    lam_lo = np.minimum(lam_lo, lam_hi)
    theta = 0.5 * np.arctan2(2.0 * b, a - d)
    c, s = np.cos(theta), np.sin(theta)
    U = np.empty(t.shape)
    U[..., 0, 0], U[..., 1, 0] = -s, c  # small eigenvalue
    U[..., 0, 1], U[..., 1, 1] = c, s  # large eigenvalue
    return np.stack([lam_lo, lam_hi], axis=-1), U


def eigen_2x2(tensor) -> EigenPair2x2:
    lam, U = eigen_2x2_batch(np.asarray(tensor, dtype=float))
    return EigenPair2x2(float(lam[0]), float(lam[1]), U[:, 0].copy(), U[:, 1].copy())


def check_spd(tensors: np.ndarray) -> np.ndarray:
    """Return the eigenvalues, raising SingularTensor unless all are positive."""
    lam, _ = eigen_2x2_batch(tensors)
    if np.any(lam[..., 0] <= 0.0):
        raise SingularTensor("diffusion tensor has a non-positive eigenvalue")
    return lam


def cell_tensors(mesh: CartesianMesh, spec: ProblemSpec) -> np.ndarray:
    """Lambda_K evaluated at the cell centres, shape ``(nc, 2, 2)``."""
    xc = mesh.cell_centers
    lam = np.asarray(spec.diffusion(xc[:, 0], xc[:, 1]), dtype=float)
    return np.broadcast_to(lam, (mesh.n_cells, 2, 2)).copy()


def cell_source(mesh: CartesianMesh, spec: ProblemSpec) -> np.ndarray:
    """Piecewise-constant source s_K = s(x_K)."""
    xc = mesh.cell_centers
    s = np.asarray(spec.source(xc[:, 0], xc[:, 1]), dtype=float)
    return np.broadcast_to(s, (mesh.n_cells,)).copy()


def edge_velocity(mesh: CartesianMesh, spec: ProblemSpec) -> np.ndarray:
    """Edge-averaged velocity vector V_sigma by two-point Gauss quadrature."""
    mid = mesh.edge_mid
    half = 0.5 * mesh.edge_length * _GAUSS
    tangent = np.where(mesh.edge_axis[:, None] == 0, [0.0, 1.0], [1.0, 0.0])
    p = mid + (half[:, None] * tangent)
    q = mid - (half[:, None] * tangent)
    vp = np.asarray(spec.velocity(p[:, 0], p[:, 1]), dtype=float)
    vq = np.asarray(spec.velocity(q[:, 0], q[:, 1]), dtype=float)
    v = 0.5 * (np.broadcast_to(vp, p.shape) + np.broadcast_to(vq, q.shape))
    return v


def local_normal_velocity(mesh: CartesianMesh, v_edge: np.ndarray) -> np.ndarray:
    """V_{K,sigma} for every cell and local edge, shape ``(nc, 4)``."""
    vn = v_edge[mesh.cell_edges, LOCAL_AXIS[None, :]]
    return vn * LOCAL_NORMALS.sum(axis=1)[None, :]


def edge_normal_velocity(mesh: CartesianMesh, spec: ProblemSpec, e: int, k: int) -> float:
    """(1/|sigma|) int_sigma V . n_{K,sigma} for one edge of cell ``k``."""
    local = mesh.local_index(k, e)
    v = edge_velocity(mesh, spec)[e]
    return float(v @ LOCAL_NORMALS[local])


def boundary_is_neumann(mesh: CartesianMesh, spec: ProblemSpec) -> np.ndarray:
    """Boolean flag per edge: True on Neumann boundary edges."""
    flags = np.zeros(mesh.n_edges, dtype=bool)
    if spec.is_neumann is None:
        return flags
    b = mesh.boundary_edges
    mid = mesh.edge_mid[b]
    flags[b] = np.asarray(spec.is_neumann(mid[:, 0], mid[:, 1]), dtype=bool)
    return flags
