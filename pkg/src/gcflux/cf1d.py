"""One-dimensional complete-flux scheme for constant coefficients.

Serves as an independent reference for the two-dimensional corrections:
on a grid ``x_0 < ... < x_N`` the flux through ``x_sigma_j`` between
nodes ``j`` and ``j + 1`` is ``f = f^H + f^I`` with

    f^H = (Lambda / dx) (B(-P) c_j - B(P) c_{j+1})
    f^I = dx (Z(-P, a) s_j - Z(P, 1 - a) s_{j+1})

where ``P = V dx / Lambda``, ``B`` is the Bernoulli function and
``x_sigma = (1 - a) x_j + a x_{j+1}``.  The source is piecewise constant:
``s_j`` on ``[x_j, x_sigma)`` and ``s_{j+1}`` on ``(x_sigma, x_{j+1}]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .cflux import z_function
from .errors import DomainError
from .transport import a_sg


def bernoulli(z):
    """``B(z) = z / (exp(z) - 1)``, with ``B(0) = 1``."""
    return 1.0 + a_sg(-np.asarray(z, dtype=float))


@dataclass(frozen=True)
class Grid1D:
    """Nodes and flux points; ``alpha[j]`` locates ``x_sigma_j`` inside cell ``j``."""

    nodes: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        a = np.broadcast_to(np.asarray(self.alpha, dtype=float), (x.size - 1,)).copy()
        if x.size < 2 or np.any(np.diff(x) <= 0):
            raise DomainError("nodes must be strictly increasing, at least two of them")
        if np.any((a <= 0) | (a >= 1)):
            raise DomainError("alpha must lie in (0, 1)")
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def uniform(cls, n: int, a: float = 0.0, b: float = 1.0, alpha: float = 0.5) -> "Grid1D":
        return cls(np.linspace(a, b, n + 1), np.full(n, alpha))

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def flux_points(self) -> np.ndarray:
        x = self.nodes
        return (1.0 - self.alpha) * x[:-1] + self.alpha * x[1:]

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1


def peclet_1d(V, dx, lam):
    return V * dx / lam


def homogeneous_flux_1d(c_j, c_j1, lam, V, dx):
    """Exponentially fitted flux of the homogeneous local problem."""
    P = peclet_1d(V, dx, lam)
    return lam / dx * (bernoulli(-P) * c_j - bernoulli(P) * c_j1)


def inhomogeneous_flux_1d(s_j, s_j1, P, alpha, dx):
    """Source contribution to the flux at ``x_sigma``."""
    alpha = np.asarray(alpha, dtype=float)
    zk = z_function(-np.asarray(P, dtype=float), alpha)
    zl = z_function(P, 1.0 - alpha)
    return dx * (zk * s_j - zl * s_j1)


def solve_1d(grid: Grid1D, lam: float, V: float, s, left: float, right: float, complete: bool = True) -> np.ndarray:
    """Nodal values of ``(V c - lam c')' = s`` with Dirichlet ends.

    ``s`` is an array of nodal source values or a callable evaluated at
    the nodes.  Node ``j`` owns the control volume between neighbouring
    flux points; the balance there reads ``f_j - f_{j-1} = s_j |CV_j|``.
    """
    if lam <= 0:
        raise DomainError("diffusion coefficient must be positive")
    x = grid.nodes
    s = np.asarray(s(x) if callable(s) else s, dtype=float)
    s = np.broadcast_to(s, x.shape)
    dx = grid.dx
    P = peclet_1d(V, dx, lam)
    bm, bp = bernoulli(-P), bernoulli(P)
    a_diag = lam / dx * bm  # coefficient of c_j in f_j
    b_off = -lam / dx * bp  # coefficient of c_{j+1} in f_j
    fi = inhomogeneous_flux_1d(s[:-1], s[1:], P, grid.alpha, dx) if complete else np.zeros_like(dx)

    n = grid.n_intervals
    m = n - 1
    if m == 0:
        return np.array([left, right], dtype=float)
    xs = grid.flux_points
    cv = xs[1:] - xs[:-1]
    rhs = s[1:-1] * cv - fi[1:] + fi[:-1]

    # row i (node i + 1): f_{i+1} - f_i
    ab = np.zeros((3, m))
    ab[1] = a_diag[1:] - b_off[:-1]
    ab[0, 1:] = b_off[1:-1]
    ab[2, :-1] = -a_diag[1:-1]
    rhs[0] += a_diag[0] * left
    rhs[-1] -= b_off[-1] * right
    inner = solve_banded((1, 1), ab, rhs)
    return np.concatenate([[left], inner, [right]])


def fluxes_1d(grid: Grid1D, lam: float, V: float, s, c: np.ndarray, complete: bool = True) -> np.ndarray:
    """Complete fluxes ``f_j`` at every flux point for nodal values ``c``."""
    x = grid.nodes
    s = np.broadcast_to(np.asarray(s(x) if callable(s) else s, dtype=float), x.shape)
    dx = grid.dx
    f = homogeneous_flux_1d(c[:-1], c[1:], lam, V, dx)
    if complete:
        f = f + inhomogeneous_flux_1d(s[:-1], s[1:], peclet_1d(V, dx, lam), grid.alpha, dx)
    return f
