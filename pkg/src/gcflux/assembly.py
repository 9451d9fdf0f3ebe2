"""Global hybrid system: one balance row per cell, one row per edge.

Cell rows impose ``sum_sigma (F^H + F^I) = s_K |K|``.  Interior edge rows
impose ``F^H_{K,sigma} + F^H_{L,sigma} = 0``; the complete-flux
corrections are left out there because they cancel pairwise across every
interior edge.  Dirichlet edges are pinned by identity rows, Neumann edges
impose ``F^D_{K,sigma} = -h |sigma|``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .cflux import InhomogeneousContribution, inhomogeneous_contributions
from .errors import MissingMeanValue, SingularSystem, SolverBreakdown
from .hmm import local_diffusion_matrices
from .mesh import LOCAL_NORMALS, CartesianMesh
from .ordering import dof_positions, nested_dissection
from .problem import (
    ProblemSpec,
    boundary_is_neumann,
    cell_source,
    cell_tensors,
    edge_velocity,
    local_normal_velocity,
)
from .transport import lambda_sigma, local_advective_coeffs, local_peclet

SCHEMES = ("hf", "cf")
PRUNE_TOL = 16 * np.finfo(float).eps
ROW_KINDS = ("cell-balance", "edge-conservation", "dirichlet", "neumann", "mean-constraint")


@dataclass(frozen=True)
class HomogeneousForms:
    """Flux forms over the local unknowns ``[c_K, c_W, c_E, c_S, c_N]``.

    ``D[k, s]`` is the HMM diffusive flux and ``H[k, s]`` the homogeneous
    flux ``F^D + F^A`` through local edge ``s`` of cell ``k``.
    """

    D: np.ndarray
    H: np.ndarray
    W: np.ndarray
    adv_cell: np.ndarray
    adv_edge: np.ndarray
    lam_edge: np.ndarray


def homogeneous_forms(mesh: CartesianMesh, tensors: np.ndarray, v_edge: np.ndarray, lambda_variant: str = "grid") -> HomogeneousForms:
    W = local_diffusion_matrices(mesh.hx, mesh.hy, tensors)
    nc = mesh.n_cells
    D = np.empty((nc, 4, 5))
    D[:, :, 0] = W.sum(axis=-1)
    D[:, :, 1:] = -W
    lam = lambda_sigma(mesh, tensors, lambda_variant)
    ac, ae = local_advective_coeffs(mesh, local_normal_velocity(mesh, v_edge), lam)
    H = D.copy()
    H[:, :, 0] += ac
    idx = np.arange(4)
    H[:, idx, idx + 1] += ae
    return HomogeneousForms(D=D, H=H, W=W, adv_cell=ac, adv_edge=ae, lam_edge=lam)


@dataclass(frozen=True)
class Discretisation:
    """Everything computed on the way to the linear system."""

    mesh: CartesianMesh
    spec: ProblemSpec
    scheme: str
    peclet_variant: str
    lambda_variant: str
    tensors: np.ndarray
    v_edge: np.ndarray
    s_cell: np.ndarray
    forms: HomogeneousForms
    peclet: np.ndarray | None
    inhomogeneous: InhomogeneousContribution | None
    edge_kind: np.ndarray


@dataclass(frozen=True)
class SparseSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    row_kind: np.ndarray  # indices into ROW_KINDS
    disc: Discretisation
    has_multiplier: bool = False

    @property
    def row_kind_names(self) -> list[str]:
        return [ROW_KINDS[i] for i in self.row_kind]


@dataclass(frozen=True)
class Solution:
    mesh: CartesianMesh
    x: np.ndarray
    stats: dict = field(default_factory=dict)

    @property
    def cell_values(self) -> np.ndarray:
        return self.x[: self.mesh.n_cells]

    @property
    def edge_values(self) -> np.ndarray:
        return self.x[self.mesh.n_cells : self.mesh.n_dofs]


def edge_local_indices(mesh: CartesianMesh) -> np.ndarray:
    """Local index of each edge within its negative and positive cell."""
    vertical = mesh.edge_axis == 0
    return np.stack([np.where(vertical, 1, 3), np.where(vertical, 0, 2)], axis=1)


def discretise(mesh, spec, scheme="cf", peclet_variant="grid", lambda_variant="grid") -> Discretisation:
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    tensors = cell_tensors(mesh, spec)
    v_edge = edge_velocity(mesh, spec)
    s_cell = cell_source(mesh, spec)
    forms = homogeneous_forms(mesh, tensors, v_edge, lambda_variant)

    kind = np.full(mesh.n_edges, kernels.KIND_INTERIOR, dtype=np.int8)
    kind[mesh.boundary_edges] = kernels.KIND_DIRICHLET
    kind[boundary_is_neumann(mesh, spec)] = kernels.KIND_NEUMANN

    peclet = inhom = None
    if scheme == "cf":
        peclet = local_peclet(mesh, tensors, v_edge, peclet_variant)
        inhom = inhomogeneous_contributions(mesh, s_cell, peclet)
    return Discretisation(
        mesh=mesh,
        spec=spec,
        scheme=scheme,
        peclet_variant=peclet_variant,
        lambda_variant=lambda_variant,
        tensors=tensors,
        v_edge=v_edge,
        s_cell=s_cell,
        forms=forms,
        peclet=peclet,
        inhomogeneous=inhom,
        edge_kind=kind,
    )


def _boundary_rhs(disc: Discretisation) -> np.ndarray:
    mesh, spec = disc.mesh, disc.spec
    rhs = np.zeros(mesh.n_edges)
    mid = mesh.edge_mid
    dir_e = np.flatnonzero(disc.edge_kind == kernels.KIND_DIRICHLET)
    if dir_e.size:
        rhs[dir_e] = np.broadcast_to(spec.dirichlet(mid[dir_e, 0], mid[dir_e, 1]), dir_e.shape)
    neu_e = np.flatnonzero(disc.edge_kind == kernels.KIND_NEUMANN)
    if neu_e.size:
        if spec.neumann is None:
            h = np.zeros(neu_e.size)
        else:
            # outward normal: the edge has a cell on exactly one side
            local = np.where(mesh.edge_cells[neu_e, 0] >= 0, edge_local_indices(mesh)[neu_e, 0], edge_local_indices(mesh)[neu_e, 1])
            n = LOCAL_NORMALS[local]
            h = np.broadcast_to(spec.neumann(mid[neu_e, 0], mid[neu_e, 1], n), neu_e.shape)
        rhs[neu_e] = -h * mesh.edge_length[neu_e]
    return rhs


def assemble(mesh: CartesianMesh, spec: ProblemSpec, scheme: str = "cf", peclet_variant: str = "grid", lambda_variant: str = "grid") -> SparseSystem:
    """Build the sparse system for the homogeneous (``hf``) or complete (``cf``) flux scheme."""
    disc = discretise(mesh, spec, scheme, peclet_variant, lambda_variant)
    nc, ne = mesh.n_cells, mesh.n_edges
    H, D = disc.forms.H, disc.forms.D
    complete = scheme == "cf"
    if complete:
        wk, wl = disc.inhomogeneous.wk, disc.inhomogeneous.wl
    else:
        wk = wl = np.zeros((nc, 4, 2))

    r1, c1, v1 = kernels.cell_row_triplets(mesh.cell_dofs, H, mesh.neighbors, wk, wl, complete)
    r2, c2, v2 = kernels.edge_row_triplets(nc, mesh.edge_cells, edge_local_indices(mesh), disc.edge_kind, mesh.cell_dofs, H, D)

    rhs_cells = disc.s_cell * mesh.cell_area
    if complete:
        rhs_cells = rhs_cells - disc.inhomogeneous.source.sum(axis=1)
    rhs = np.concatenate([rhs_cells, _boundary_rhs(disc)])
    kinds = np.concatenate(
        [np.zeros(nc, dtype=np.int8), np.where(disc.edge_kind == kernels.KIND_INTERIOR, 1, np.where(disc.edge_kind == kernels.KIND_DIRICHLET, 2, 3)).astype(np.int8)]
    )

    rows, cols, vals = [r1, r2], [c1, c2], [v1, v2]
    n = nc + ne
    multiplier = not np.any(disc.edge_kind == kernels.KIND_DIRICHLET)
    if multiplier:
        if spec.mean_value is None:
            raise MissingMeanValue("all boundary edges are Neumann: a mean value is required")
        weights = np.full(nc, mesh.cell_area / (nc * mesh.cell_area))
        cells = np.arange(nc, dtype=np.int64)
        lm = np.full(nc, n, dtype=np.int64)
        # bordered system: constraint row plus Lagrange multiplier column
        rows += [lm, cells]
        cols += [cells, lm]
        vals += [weights, weights]
        rhs = np.append(rhs, float(spec.mean_value))
        kinds = np.append(kinds, np.int8(4))
        n += 1

    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()
    A.sum_duplicates()
    # cancelling cross-flux terms leave rounding residue; drop it from the pattern
    rowmax = np.maximum.reduceat(np.abs(A.data), A.indptr[:-1]) if A.nnz else np.zeros(0)
    rowmax = np.repeat(rowmax, np.diff(A.indptr))
    A.data[np.abs(A.data) <= PRUNE_TOL * rowmax] = 0.0
    A.eliminate_zeros()
    return SparseSystem(matrix=A, rhs=rhs, row_kind=kinds, disc=disc, has_multiplier=multiplier)


ORDERINGS = ("nd", "colamd")


def _factorise(A: sp.csr_matrix, mesh: CartesianMesh, ordering: str):
    """Row-equilibrated sparse LU; returns ``x = apply(r)`` solving ``A x = r``."""
    rowmax = np.asarray(abs(A).max(axis=1).todense()).ravel()
    if np.any(rowmax == 0):
        raise SingularSystem("matrix has an empty row")
    scale = 1.0 / rowmax
    As = sp.diags(scale) @ A
    if ordering == "nd":
        perm = nested_dissection(As, dof_positions(mesh, A.shape[0]))
        As = As[perm][:, perm]
        permc = "NATURAL"
    elif ordering == "colamd":
        perm = None
        permc = "COLAMD"
    else:
        raise ValueError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")
    try:
        # prefer diagonal pivots: they keep the fill of the chosen ordering
        lu = spla.splu(As.tocsc(), permc_spec=permc, diag_pivot_thresh=0.01, options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc

    def apply(r):
        r = scale * r
        if perm is None:
            return lu.solve(r)
        x = np.empty_like(r)
        x[perm] = lu.solve(r[perm])
        return x

    return apply, lu.L.nnz + lu.U.nnz


def solve(system: SparseSystem, tol: float = 1e-10, refinements: int = 3, ordering: str = "nd") -> Solution:
    """Direct sparse LU solve with a few steps of iterative refinement.

    Rows are scaled to unit maximum before factorisation; the unknowns are
    permuted by geometric nested dissection (``ordering="nd"``) or left to
    SuperLU's COLAMD (``ordering="colamd"``).
    """
    A, b = system.matrix, system.rhs
    start = time.perf_counter()
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        x = np.zeros_like(b)
        return Solution(system.disc.mesh, x, {"residual": 0.0, "refinements": 0, "seconds": 0.0, "fill": 0})
    apply, fill = _factorise(A, system.disc.mesh, ordering)
    x = apply(b)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("factorisation produced non-finite values")
    res = float(np.linalg.norm(A @ x - b)) / bnorm
    steps = 0
    while res > tol and steps < refinements:
        x = x + apply(b - A @ x)
        res = float(np.linalg.norm(A @ x - b)) / bnorm
        steps += 1
    if not res <= tol:
        raise SolverBreakdown(f"relative residual {res:.3e} above {tol:.1e}")
    stats = {"residual": res, "refinements": steps, "seconds": time.perf_counter() - start, "fill": fill}
    return Solution(system.disc.mesh, x, stats)


def solve_problem(mesh, spec, scheme="cf", peclet_variant="grid", lambda_variant="grid", tol=1e-10, ordering="nd") -> Solution:
    return solve(assemble(mesh, spec, scheme, peclet_variant, lambda_variant), tol=tol, ordering=ordering)
