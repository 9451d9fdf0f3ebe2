"""Complete-flux finite-volume schemes for anisotropic advection-diffusion."""

from .analysis import ConvergenceReport, error_l1_relative, export, field_stats
from .assembly import assemble, solve, solve_problem
from .cases import builtin_case, load_case_file
from .kernels import BACKEND
from .mesh import build_mesh
from .problem import ProblemSpec

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceReport",
    "ProblemSpec",
    "assemble",
    "build_mesh",
    "builtin_case",
    "error_l1_relative",
    "export",
    "field_stats",
    "load_case_file",
    "solve",
    "solve_problem",
]
