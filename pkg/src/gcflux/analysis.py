"""Error norms, convergence orders, field statistics and file export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IoError, NoExactSolution, NonDoublingLevels
from .mesh import CartesianMesh
from .problem import ProblemSpec

VTK_SENTINEL = -1e30
EXPORT_FORMATS = ("csv", "vtk-legacy")


def _cell_values(solution) -> np.ndarray:
    return np.asarray(getattr(solution, "cell_values", solution), dtype=float)


def error_l1_relative(solution, spec: ProblemSpec, mesh: CartesianMesh) -> float:
    """Relative L1 error of the cell values against the exact solution at cell centres.

    ``E1 = sum |K| |c_K - c(x_K)| / sum |K| |c(x_K)|``.
    """
    if spec.exact is None:
        raise NoExactSolution(f"case {spec.name!r} has no exact solution")
    c = _cell_values(solution)
    xc = mesh.cell_centers
    exact = np.broadcast_to(spec.exact(xc[:, 0], xc[:, 1]), c.shape)
    # uniform cells: the area weights cancel
    return float(np.abs(c - exact).sum() / np.abs(exact).sum())


@dataclass(frozen=True)
class ConvergenceReport:
    """``levels`` holds ``(nx, E1)`` pairs in increasing resolution."""

    levels: tuple[tuple[int, float], ...]

    def __post_init__(self):
        levels = tuple((int(n), float(e)) for n, e in self.levels)
        if any(e <= 0 or not math.isfinite(e) for _, e in levels):
            raise ValueError("errors must be positive and finite")
        object.__setattr__(self, "levels", levels)

    @property
    def orders(self) -> tuple[float, ...]:
        return tuple(convergence_orders(self))

    def rows(self) -> list[tuple[int, float, float | None]]:
        """``(nx, E1, order)`` with the order against the previous level."""
        orders = (None,) + self.orders
        return [(n, e, o) for (n, e), o in zip(self.levels, orders)]


def convergence_orders(report) -> np.ndarray:
    """``log2(E1_i / E1_{i+1})`` between consecutive doubling levels."""
    levels = report.levels if isinstance(report, ConvergenceReport) else report
    levels = [(int(n), float(e)) for n, e in levels]
    if len(levels) < 2:
        raise NonDoublingLevels("at least two levels are needed")
    for (n0, _), (n1, _) in zip(levels, levels[1:]):
        if n1 != 2 * n0:
            raise NonDoublingLevels(f"level {n1} does not double {n0}")
    e = np.array([v for _, v in levels])
    return np.log2(e[:-1] / e[1:])


@dataclass(frozen=True)
class FieldStats:
    min: float
    max: float
    negative_cell_fraction: float


def field_stats(solution, mesh: CartesianMesh | None = None, zero_tol: float | None = None) -> FieldStats:
    """Extremes and the fraction of active cells carrying a negative value.

    A cell counts as negative when its value is below ``-zero_tol``.  By
    default ``zero_tol = eps * max|c|``: values that small are zero to
    working precision and their sign carries no information.  Pass
    ``zero_tol=0`` for a strict sign count.
    """
    c = _cell_values(solution)
    if c.size == 0:
        return FieldStats(0.0, 0.0, 0.0)
    if zero_tol is None:
        zero_tol = np.finfo(float).eps * float(np.abs(c).max())
    frac = np.count_nonzero(c < -zero_tol) / c.size
    return FieldStats(float(c.min()), float(c.max()), float(frac))


def write_csv(path, mesh: CartesianMesh, values) -> Path:
    """One row ``x,y,c`` per active cell in row-major order, 17 significant digits."""
    c = _cell_values(values)
    xc = mesh.cell_centers
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("x", "y", "c"))
            for (x, y), v in zip(xc, c):
                w.writerow((f"{x:.17g}", f"{y:.17g}", f"{v:.17g}"))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def read_csv(path) -> np.ndarray:
    """Inverse of :func:`write_csv`; returns an ``(n, 3)`` array."""
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return data


def write_vtk(path, mesh: CartesianMesh, values, name: str = "c") -> Path:
    """Legacy ASCII VTK on the full lattice.

    Inactive cells hold ``-1e30`` and are flagged by the integer ``mask``
    array (1 for active cells).
    """
    c = _cell_values(values)
    full = np.full(mesh.nx * mesh.ny, VTK_SENTINEL)
    flat_active = mesh.active.ravel()
    full[flat_active] = c
    x0, _, y0, _ = mesh.bounds
    lines = [
        "# vtk DataFile Version 3.0",
        f"gcflux field {name}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {mesh.nx + 1} {mesh.ny + 1} 1",
        f"ORIGIN {x0:.17g} {y0:.17g} 0",
        f"SPACING {mesh.hx:.17g} {mesh.hy:.17g} 1",
        f"CELL_DATA {mesh.nx * mesh.ny}",
        f"SCALARS {name} double 1",
        "LOOKUP_TABLE default",
    ]
    lines += [f"{v:.17g}" for v in full]
    lines += ["SCALARS mask int 1", "LOOKUP_TABLE default"]
    lines += ["1" if a else "0" for a in flat_active]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def export(solution, mesh: CartesianMesh, path, format: str = "csv") -> Path:
    if format == "csv":
        return write_csv(path, mesh, solution)
    if format in ("vtk", "vtk-legacy"):
        return write_vtk(path, mesh, solution)
    raise ValueError(f"unknown export format {format!r}; expected one of {EXPORT_FORMATS}")
