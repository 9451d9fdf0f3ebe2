"""Inhomogeneous (complete-flux) corrections on interior edges.

For an interior edge sigma shared by K and L the correction reads

    F^I_{K,sigma} = F^{I,s}_{K,sigma} - F^{I,c}_{K,sigma}

where the source flux ``F^{I,s}`` is a constant and the cross-flux
``F^{I,c}`` is a combination of the homogeneous fluxes through the two
edges of K (and of L) orthogonal to sigma.  The cross-flux is therefore a
matrix contribution and not a right-hand-side term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSegment, DomainError
from .mesh import CROSS, OPPOSITE, CartesianMesh
from .transport import expm1mx

_TINY_P = 1e-8


def z_function(P, alpha):
    """``Z(P, a) = (exp(aP) - 1 - aP) / (P (exp(P) - 1))``, vectorised.

    ``Z`` lies in ``[0, a]``, tends to ``a**2 / 2`` as ``P -> 0``, to 0 as
    ``P -> +inf`` and to ``a`` as ``P -> -inf``.
    """
    P = np.asarray(P, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if np.any((alpha < 0.0) | (alpha > 1.0)) or np.any(np.isnan(alpha)):
        raise DomainError("alpha must lie in [0, 1]")
    P, alpha = np.broadcast_arrays(P, alpha)
    scalar = P.ndim == 0
    P, alpha = np.atleast_1d(P).astype(float), np.atleast_1d(alpha).astype(float)
    out = np.empty(P.shape)

    tiny = np.abs(P) < _TINY_P
    a = alpha[tiny]
    out[tiny] = a * a / 2 + (a**3 / 6 - a * a / 4) * P[tiny]

    neg = (P < 0) & ~tiny
    p, a = P[neg], alpha[neg]
    out[neg] = expm1mx(a * p) / (p * np.expm1(p))

    # P > 0: divide through by exp(P) so nothing overflows
    pos = (P > 0) & ~tiny
    p, a = P[pos], alpha[pos]
    denom = p * -np.expm1(-p)
    ap = a * p
    low = ap <= 1.0
    res = np.empty(p.shape)
    res[low] = expm1mx(ap[low]) * np.exp(-p[low]) / denom[low]
    hi = ~low
    res[hi] = (np.exp((a[hi] - 1.0) * p[hi]) - np.exp(-p[hi]) * (1.0 + ap[hi])) / denom[hi]
    out[pos] = res
    return out[0] if scalar else out


def alpha_coordinate(x_k, x_l, x_sigma) -> float:
    """Scaled coordinate with ``x_sigma = (1 - a) x_K + a x_L``."""
    x_k, x_l, x_sigma = (np.asarray(v, dtype=float) for v in (x_k, x_l, x_sigma))
    seg = x_l - x_k
    length2 = float(seg @ seg)
    if length2 == 0.0:
        raise DegenerateSegment("x_K and x_L coincide")
    return float((x_sigma - x_k) @ seg / length2)


def source_flux(dist_kl, length, P, alpha, s_k, s_l, one_minus_alpha=None):
    """Source part of the inhomogeneous flux for rectangular sub-regions.

    ``length * dist_kl * (Z(-P, a) s_K - Z(P, 1 - a) s_L)``; with
    ``|K'_sigma| = |sigma| |x_K - x_sigma|`` the geometric prefactors
    collapse to ``|sigma| |x_K - x_L|``.
    """
    if one_minus_alpha is None:
        one_minus_alpha = 1.0 - np.asarray(alpha, dtype=float)
    zk = z_function(-np.asarray(P, dtype=float), alpha)
    zl = z_function(P, one_minus_alpha)
    return length * dist_kl * (zk * s_k - zl * s_l)


def cross_flux(dist_kl, P, alpha, forms_k, forms_l, cross_lengths_k, cross_lengths_l):
    """Cross-flux as a linear form.

    ``forms_k`` / ``forms_l`` are the homogeneous flux forms of the two
    cross edges of K and of L, each a ``{dof: coeff}`` mapping.  Each
    sub-region flux is ``|x_K - x_sigma| / |sigma_N| * F^H_{K,sigma_N}``.
    """
    zk = float(z_function(-P, alpha))
    zl = float(z_function(P, 1.0 - alpha))
    out: dict[int, float] = {}
    for forms, lengths, weight in ((forms_k, cross_lengths_k, zk), (forms_l, cross_lengths_l, -zl)):
        for form, edge_len in zip(forms, lengths):
            scale = weight * dist_kl / edge_len
            for dof, coeff in form.items():
                out[dof] = out.get(dof, 0.0) + scale * coeff
    return out


@dataclass(frozen=True)
class InhomogeneousContribution:
    """Per ``(cell, local edge)`` data of ``F^I`` in array form.

    ``F^I_{K,s} = source[K, s] - sum_c wk[K, s, c] F^H_{K, CROSS[s, c]}
    + sum_c wl[K, s, c] F^H_{L, CROSS[s, c]}`` with L the neighbour across
    local edge ``s``.  All entries vanish on boundary edges.
    """

    source: np.ndarray  # (nc, 4)
    wk: np.ndarray  # (nc, 4, 2)
    wl: np.ndarray  # (nc, 4, 2)

    def linear_form(self, mesh: CartesianMesh, H: np.ndarray, k: int, s: int) -> tuple[float, dict[int, float]]:
        """``(constant, {dof: coeff})`` representation of ``F^I_{K,s}``."""
        dofs = mesh.cell_dofs
        form: dict[int, float] = {}
        L = mesh.neighbors[k, s]
        if L < 0:
            return 0.0, form
        for c in range(2):
            a = CROSS[s, c]
            for j in range(5):
                dk, dl = int(dofs[k, j]), int(dofs[L, j])
                form[dk] = form.get(dk, 0.0) - self.wk[k, s, c] * H[k, a, j]
                form[dl] = form.get(dl, 0.0) + self.wl[k, s, c] * H[L, a, j]
        return float(self.source[k, s]), form

    def evaluate(self, mesh: CartesianMesh, H: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Values of ``F^I`` for a global unknown vector ``x``."""
        fh = np.einsum("ksj,kj->ks", H, x[mesh.cell_dofs])
        nb = mesh.neighbors
        safe = np.where(nb >= 0, nb, 0)
        cross_k = fh[:, CROSS]  # (nc, 4, 2)
        cross_l = fh[safe[:, :, None], CROSS[None, :, :]]
        out = self.source - (self.wk * cross_k).sum(-1) + (self.wl * cross_l).sum(-1)
        return np.where(nb >= 0, out, 0.0)


def inhomogeneous_contributions(mesh: CartesianMesh, s_cell: np.ndarray, peclet: np.ndarray) -> InhomogeneousContribution:
    """Evaluate source flux and cross-flux weights on every interior edge.

    ``peclet`` holds ``P_{K,sigma}`` per cell and local edge.  The scaled
    coordinate is taken once per edge from its negative-side cell, and the
    positive side reuses the complementary value, so the two one-sided
    corrections negate each other bit for bit.
    """
    nc = mesh.n_cells
    nb = mesh.neighbors
    interior = nb >= 0
    dist = np.broadcast_to(mesh.local_distance, (nc, 4))
    length = np.broadcast_to(mesh.local_edge_length, (nc, 4))
    dist_l = dist[:, OPPOSITE]
    dist_kl = dist + dist_l

    # alpha of the negative-side cell; W and S edges of K are positive-side
    alpha_edge = np.where(np.isin(np.arange(4), (0, 2))[None, :], dist_l, dist) / dist_kl
    positive_side = np.broadcast_to(np.isin(np.arange(4), (0, 2)), (nc, 4))
    alpha_k = np.where(positive_side, 1.0 - alpha_edge, alpha_edge)
    one_minus = np.where(positive_side, alpha_edge, 1.0 - alpha_edge)

    P = np.where(interior, peclet, 0.0)
    zk = np.where(interior, z_function(-P, alpha_k), 0.0)
    zl = np.where(interior, z_function(P, one_minus), 0.0)

    s_l = np.where(interior, s_cell[np.where(interior, nb, 0)], 0.0)
    source = length * dist_kl * (zk * s_cell[:, None] - zl * s_l)

    cross_len = mesh.local_edge_length[CROSS]  # (4, 2)
    wk = (zk * dist_kl)[:, :, None] / cross_len[None]
    wl = (zl * dist_kl)[:, :, None] / cross_len[None]
    return InhomogeneousContribution(source=source, wk=wk, wl=wl)
