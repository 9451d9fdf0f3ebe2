"""Hybrid mimetic mixed (HMM) gradient and diffusive fluxes on rectangles.

Local edge order is ``W, E, S, N``.  Local values are handed around as the
differences ``delta_sigma = w_sigma - w_K``; the stabilised gradient on the
sub-cell ``D_{K,sigma}`` is linear in them, ``grad_D w = G[sigma] @ delta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularTensor
from .mesh import LOCAL_NORMALS
from .problem import eigen_2x2_batch

_DIM = 2


@dataclass(frozen=True)
class DiscreteGradient:
    mean: np.ndarray  # (2,)
    subcell: np.ndarray  # (4, 2), one gradient per sub-cell W, E, S, N


@dataclass(frozen=True)
class LocalDiffusionMatrix:
    """``F^D_sigma = sum_s' W[sigma, s'] (c_K - c_s')``."""

    W: np.ndarray

    def fluxes(self, c_cell: float, c_edges) -> np.ndarray:
        return self.W @ (c_cell - np.asarray(c_edges, dtype=float))


def _geometry(hx: float, hy: float):
    lengths = np.array([hy, hy, hx, hx])
    dist = np.array([hx, hx, hy, hy]) / 2.0
    area = hx * hy
    return lengths, dist, area


def gradient_operators(hx: float, hy: float) -> np.ndarray:
    """Matrices ``G`` of shape ``(4, 2, 4)`` mapping differences to sub-cell gradients."""
    lengths, dist, area = _geometry(hx, hy)
    n = LOCAL_NORMALS
    mean_op = (n * lengths[:, None]).T / area  # (2, 4)
    G = np.empty((4, 2, 4))
    for s in range(4):
        # x_sigma - x_K = d_sigma n_sigma on a rectangle
        offset = dist[s] * n[s]
        stab = -(offset @ mean_op)
        stab[s] += 1.0
        G[s] = mean_op + (np.sqrt(_DIM) / dist[s]) * np.outer(n[s], stab)
    return G


def subcell_volumes(hx: float, hy: float) -> np.ndarray:
    lengths, dist, _ = _geometry(hx, hy)
    return lengths * dist / _DIM


def discrete_gradient(hx: float, hy: float, w_cell: float, w_edges) -> DiscreteGradient:
    """Cell-mean and stabilised sub-cell gradients of local values."""
    lengths, dist, area = _geometry(hx, hy)
    w_edges = np.asarray(w_edges, dtype=float)
    diff = w_edges - w_cell
    mean = (lengths * diff) @ LOCAL_NORMALS / area
    sub = np.empty((4, 2))
    for s in range(4):
        xs_minus_xk = dist[s] * LOCAL_NORMALS[s]
        residual = diff[s] - mean @ xs_minus_xk
        sub[s] = mean + np.sqrt(_DIM) / dist[s] * residual * LOCAL_NORMALS[s]
    return DiscreteGradient(mean, sub)


def local_diffusion_matrices(hx: float, hy: float, tensors: np.ndarray) -> np.ndarray:
    """Batched ``W_K`` for tensors of shape ``(nc, 2, 2)``; returns ``(nc, 4, 4)``.

    ``W = sum_sigma |D_sigma| G_sigma^T Lambda G_sigma`` is the Gram matrix of
    the local bilinear form on the difference variables.
    """
    tensors = np.asarray(tensors, dtype=float)
    lam, _ = eigen_2x2_batch(tensors)
    if np.any(lam[..., 0] <= 0.0):
        raise SingularTensor("diffusion tensor has a non-positive eigenvalue")
    G = gradient_operators(hx, hy)
    vol = subcell_volumes(hx, hy)
    Gw = G * vol[:, None, None]
    W = np.einsum("sai,kab,sbj->kij", Gw, tensors, G, optimize=True)
    return 0.5 * (W + np.swapaxes(W, -1, -2))


def local_diffusion_matrix(hx: float, hy: float, tensor) -> LocalDiffusionMatrix:
    W = local_diffusion_matrices(hx, hy, np.asarray(tensor, dtype=float)[None])[0]
    return LocalDiffusionMatrix(W)
