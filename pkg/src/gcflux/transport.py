"""Hybridised Scharfetter-Gummel advection and local Peclet numbers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularTensor
from .mesh import LOCAL_NORMALS, CartesianMesh
from .problem import eigen_2x2_batch

LAMBDA_VARIANTS = ("grid", "eigenvalue")
PECLET_VARIANTS = ("grid", "eigen")

_SERIES_CUT = 1e-4
_ASYMPTOTIC_CUT = 500.0


def expm1mx(x):
    """``exp(x) - 1 - x`` without cancellation near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 0.1
    xs = x[small]
    # Horner form of sum_{k=2}^{10} x^k / k!
    acc = np.full_like(xs, 1.0 / 3628800.0)
    for k in range(9, 1, -1):
        acc = acc * xs + 1.0 / _FACT[k]
    out[small] = acc * xs * xs
    xl = x[~small]
    out[~small] = np.expm1(xl) - xl
    return out


_FACT = [1.0]
for _k in range(1, 12):
    _FACT.append(_FACT[-1] * _k)


def a_sg(t):
    """``A_sg(t) = -t / (exp(-t) - 1) - 1``, i.e. ``B(-t) - 1`` for the Bernoulli B.

    Evaluated as ``expm1mx(-t) / -expm1(-t)`` away from the removable
    singularity; ``A_sg(t) - A_sg(-t) = t`` holds identically.
    """
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    t = np.atleast_1d(t)
    out = np.empty_like(t)
    small = np.abs(t) < _SERIES_CUT
    ts = t[small]
    out[small] = ts / 2 + ts**2 / 12 - ts**4 / 720
    pos = t > _ASYMPTOTIC_CUT
    out[pos] = t[pos] - 1.0
    neg = t < -_ASYMPTOTIC_CUT
    out[neg] = -1.0
    # t <= -1: B(-t) - 1 with B(u) = u / expm1(u); rounding of x - 1 is
    # monotone in x, so the saturation towards -1 stays monotone
    low = (t <= -1.0) & ~neg
    tl = -t[low]
    out[low] = tl / np.expm1(tl) - 1.0
    mid = ~(small | pos | neg | low)
    tm = t[mid]
    out[mid] = expm1mx(-tm) / -np.expm1(-tm)
    return out[0] if scalar else out


@dataclass(frozen=True)
class AdvectiveFluxCoeffs:
    """``F^A_{K,sigma} = coeff_cell * c_K + coeff_edge * c_sigma``."""

    coeff_cell: float
    coeff_edge: float


def advective_coeffs(length, dist, v_normal, lam_sigma):
    """Vectorised SG coefficients for ``(|sigma|, d_{K,sigma}, V_{K,sigma}, lambda_sigma)``."""
    t = dist * np.asarray(v_normal, dtype=float) / lam_sigma
    scale = lam_sigma * length / dist
    return scale * a_sg(t), -scale * a_sg(-t)


def advective_flux_coeffs(length: float, dist: float, v_normal: float, lam_sigma: float) -> AdvectiveFluxCoeffs:
    cc, ce = advective_coeffs(length, dist, v_normal, lam_sigma)
    return AdvectiveFluxCoeffs(float(cc), float(ce))


def lambda_sigma(mesh: CartesianMesh, tensors: np.ndarray, variant: str = "grid") -> np.ndarray:
    """Scaling factor per edge, ``min(1, ...)`` over the adjacent cells.

    ``variant="eigenvalue"`` takes every eigenvalue of the neighbouring
    tensors; ``variant="grid"`` takes the normal diffusivities
    ``n^T Lambda n``.
    """
    if variant == "grid":
        axis = mesh.edge_axis
        normal_diff = lambda cells, has: tensors[cells, axis[has], axis[has]]  # noqa: E731
    elif variant == "eigenvalue":
        smallest = eigen_2x2_batch(tensors)[0][:, 0]
        normal_diff = lambda cells, has: smallest[cells]  # noqa: E731
    else:
        raise ValueError(f"unknown lambda variant {variant!r}")
    out = np.ones(mesh.n_edges)
    for side in (0, 1):
        cells = mesh.edge_cells[:, side]
        has = cells >= 0
        out[has] = np.minimum(out[has], normal_diff(cells[has], has))
    return out


def lambda_sigma_edge(tensor_k, tensor_l=None, normal=(1.0, 0.0), variant: str = "grid") -> float:
    """Single-edge version of :func:`lambda_sigma` from explicit tensors."""
    n = np.asarray(normal, dtype=float)
    tensors = [np.asarray(tensor_k, dtype=float)]
    if tensor_l is not None:
        tensors.append(np.asarray(tensor_l, dtype=float))
    if variant == "grid":
        vals = [n @ t @ n for t in tensors]
    elif variant == "eigenvalue":
        vals = [v for t in tensors for v in eigen_2x2_batch(t)[0]]
    else:
        raise ValueError(f"unknown lambda variant {variant!r}")
    return float(min(1.0, *vals))


@dataclass(frozen=True)
class PecletNumber:
    value: float
    variant: str


def peclet_grid_value(dist_kl, v_sigma, normal, tensor_k, tensor_l):
    """``|x_K - x_L| (V . n) / min(n^T Lambda_K n, n^T Lambda_L n)``, broadcasting."""
    n = np.asarray(normal, dtype=float)
    vn = np.einsum("...i,...i->...", v_sigma, n)
    dk = np.einsum("...i,...ij,...j->...", n, tensor_k, n)
    dl = np.einsum("...i,...ij,...j->...", n, tensor_l, n)
    return dist_kl * vn / np.minimum(dk, dl)


def peclet_eigen_value(dist_kl, v_sigma, normal, tensor_k):
    """``|x_K - x_L| (Lambda_K^{-1} V) . n``, broadcasting."""
    t = np.asarray(tensor_k, dtype=float)
    a, b, c, d = t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
    det = a * d - b * c
    lam, _ = eigen_2x2_batch(t)
    if np.any(lam[..., 0] <= 0.0) or np.any(lam[..., 1] > 1e16 * lam[..., 0]):
        raise SingularTensor("tensor is numerically singular for the Peclet solve")
    v = np.asarray(v_sigma, dtype=float)
    sol0 = (d * v[..., 0] - b * v[..., 1]) / det
    sol1 = (a * v[..., 1] - c * v[..., 0]) / det
    n = np.asarray(normal, dtype=float)
    return dist_kl * (sol0 * n[..., 0] + sol1 * n[..., 1])


def peclet_grid(dist_kl, v_sigma, normal, tensor_k, tensor_l) -> PecletNumber:
    return PecletNumber(float(peclet_grid_value(dist_kl, v_sigma, normal, tensor_k, tensor_l)), "grid")


def peclet_eigen(dist_kl, v_sigma, normal, tensor_k) -> PecletNumber:
    return PecletNumber(float(peclet_eigen_value(dist_kl, v_sigma, normal, tensor_k)), "eigen")


def local_peclet(mesh: CartesianMesh, tensors: np.ndarray, v_edge: np.ndarray, variant: str = "grid") -> np.ndarray:
    """P_{K,sigma} for every cell and local edge; NaN on boundary edges."""
    nb = mesh.neighbors
    interior = nb >= 0
    k_idx = np.broadcast_to(np.arange(mesh.n_cells)[:, None], nb.shape)
    normals = np.broadcast_to(LOCAL_NORMALS, nb.shape + (2,))
    v = v_edge[mesh.cell_edges]
    # |x_K - x_L| = 2 d_{K,sigma} on a uniform mesh
    dist_kl = 2.0 * mesh.local_distance[None, :] * np.ones(nb.shape)
    out = np.full(nb.shape, np.nan)
    tk = tensors[k_idx[interior]]
    if variant == "grid":
        tl = tensors[nb[interior]]
        out[interior] = peclet_grid_value(dist_kl[interior], v[interior], normals[interior], tk, tl)
    elif variant == "eigen":
        out[interior] = peclet_eigen_value(dist_kl[interior], v[interior], normals[interior], tk)
    else:
        raise ValueError(f"unknown Peclet variant {variant!r}")
    return out


def local_advective_coeffs(mesh: CartesianMesh, v_local: np.ndarray, lam_edge: np.ndarray):
    """SG coefficients for all ``(cell, local edge)`` pairs, each ``(nc, 4)``."""
    lam = lam_edge[mesh.cell_edges]
    length = mesh.local_edge_length[None, :]
    dist = mesh.local_distance[None, :]
    return advective_coeffs(length, dist, v_local, lam)

