"""Built-in test cases and the plain-text case-file loader."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ResolutionIncompatible
from .mesh import CartesianMesh, build_mesh
from .problem import ProblemSpec

CASES = ("tc1", "tc2", "tc3", "tc4", "tc5")

LAMBDA_ILL = 0.5 * np.array([[1 + 1e-8, 1 - 1e-8], [1 - 1e-8, 1 + 1e-8]])
LAMBDA_TC3 = np.array([[1.5, 1e-4], [1e-4, 1e-8]])
VELOCITY_TC123 = np.array([1.0, 2.0])

TC5_HOLE = (4 / 9, 5 / 9, 4 / 9, 5 / 9)


def rotation(theta: float) -> np.ndarray:
    """``[[cos, sin], [-sin, cos]]``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


LAMBDA_TC5 = rotation(-np.pi / 6) @ np.diag([1000.0, 1.0]) @ rotation(np.pi / 6)


def _const_tensor(t):
    t = np.asarray(t, dtype=float)
    return lambda x, y: np.broadcast_to(t, np.shape(x) + (2, 2))


def _const_vector(v):
    v = np.asarray(v, dtype=float)
    return lambda x, y: np.broadcast_to(v, np.shape(x) + (2,))


class ManufacturedSolution:
    """Exact solution with analytic gradient and Hessian."""

    def __init__(self, value, grad, hess):
        self.value, self.grad, self.hess = value, grad, hess

    def source(self, tensor, velocity):
        """``V . grad c - Lambda : hess c`` for constant ``Lambda`` and ``V``."""
        L = np.asarray(tensor, dtype=float)
        v = np.asarray(velocity, dtype=float)

        def s(x, y):
            gx, gy = self.grad(x, y)
            hxx, hxy, hyy = self.hess(x, y)
            return v[0] * gx + v[1] * gy - (L[0, 0] * hxx + 2 * L[0, 1] * hxy + L[1, 1] * hyy)

        return s

    def conormal(self, tensor):
        """``h(x, y, n) = Lambda grad c . n``."""
        L = np.asarray(tensor, dtype=float)

        def h(x, y, n):
            g = np.stack(self.grad(x, y), axis=-1)
            return np.einsum("...i,ij,...j->...", g, L, n)

        return h


SINSIN = ManufacturedSolution(
    lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
    lambda x, y: (np.pi * np.cos(np.pi * x) * np.sin(np.pi * y), np.pi * np.sin(np.pi * x) * np.cos(np.pi * y)),
    lambda x, y: (
        -np.pi**2 * np.sin(np.pi * x) * np.sin(np.pi * y),
        np.pi**2 * np.cos(np.pi * x) * np.cos(np.pi * y),
        -np.pi**2 * np.sin(np.pi * x) * np.sin(np.pi * y),
    ),
)

# c = 1 + x^2 - x y + 2 y^2
QUADRATIC = ManufacturedSolution(
    lambda x, y: 1 + x**2 - x * y + 2 * y**2,
    lambda x, y: (2 * x - y, -x + 4 * y),
    lambda x, y: (np.full(np.shape(x), 2.0), np.full(np.shape(x), -1.0), np.full(np.shape(x), 4.0)),
)

SOLUTIONS = {"sinsin": SINSIN, "quadratic": QUADRATIC}


def manufactured_problem(tensor, velocity, solution=SINSIN, name="manufactured", **kw) -> ProblemSpec:
    return ProblemSpec(
        diffusion=_const_tensor(tensor),
        velocity=_const_vector(velocity),
        source=solution.source(tensor, velocity),
        dirichlet=solution.value,
        neumann=solution.conormal(tensor),
        exact=solution.value,
        name=name,
        **kw,
    )


def tc4_diffusion(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    # Omega_1 and Omega_3 share diag(1e-6, 1)
    odd = (x < 2 / 3) == (y < 2 / 3)
    out = np.zeros(np.shape(x) + (2, 2))
    out[..., 0, 0] = np.where(odd, 1e-6, 1.0)
    out[..., 1, 1] = np.where(odd, 1.0, 1e-6)
    return out


def tc4_velocity(x, y, sign=1.0):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    vx = 40 * x * (2 * y - 1) * (x - 1)
    vy = -40 * y * (2 * x - 1) * (y - 1)
    return sign * np.stack([vx, vy], axis=-1)


def tc4_source(x, y):
    r = np.hypot(np.asarray(x) - 0.5, np.asarray(y) - 0.5)
    return 1e-2 * np.exp(-((r - 0.35) ** 2) / 0.005)


def tc5_dirichlet(x, y):
    a, b, c, d = TC5_HOLE
    tol = 1e-12
    on_hole = (x >= a - tol) & (x <= b + tol) & (y >= c - tol) & (y <= d + tol)
    return np.where(on_hole, 2.0, 0.0)


def builtin_case(case: str, nx: int, variant: str | None = None) -> tuple[CartesianMesh, ProblemSpec]:
    """Mesh and problem data of one of the catalogued cases on an ``nx x nx`` grid."""
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    if variant is not None and case != "tc4":
        raise ValueError("variants apply to tc4 only")
    if case == "tc4" and nx % 3:
        raise ResolutionIncompatible("tc4 needs a resolution divisible by 3")
    if case == "tc5" and nx % 9:
        raise ResolutionIncompatible("tc5 needs a resolution divisible by 9")

    if case in ("tc1", "tc2", "tc3"):
        tensor = {"tc1": 1e-8 * np.eye(2), "tc2": LAMBDA_ILL, "tc3": LAMBDA_TC3}[case]
        spec = manufactured_problem(tensor, VELOCITY_TC123, SINSIN, name=case)
        return build_mesh(nx, nx), spec

    if case == "tc4":
        variant = variant or "ccw"
        if variant not in ("ccw", "cw"):
            raise ValueError("tc4 variant must be 'ccw' or 'cw'")
        sign = 1.0 if variant == "ccw" else -1.0
        spec = ProblemSpec(
            diffusion=tc4_diffusion,
            velocity=lambda x, y: tc4_velocity(x, y, sign),
            source=tc4_source,
            name=f"tc4-{variant}",
        )
        return build_mesh(nx, nx), spec

    spec = ProblemSpec(
        diffusion=_const_tensor(LAMBDA_TC5),
        velocity=_const_vector([700.0, 700.0]),
        dirichlet=tc5_dirichlet,
        name="tc5",
    )
    return build_mesh(nx, nx, hole=TC5_HOLE), spec


# -- case files ---------------------------------------------------------------

_SIDES = ("west", "east", "south", "north")


def parse_case_file(text: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys are case-insensitive."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key.lower()] = value
    return out


def _float(cfg, key, default):
    try:
        return float(cfg.get(key, default))
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number: {cfg[key]!r}") from exc


def case_from_config(cfg: dict[str, str], nx: int, ny: int | None = None) -> tuple[CartesianMesh, ProblemSpec]:
    """Build a constant-coefficient case from parsed case-file keys."""
    known = {
        "name", "x0", "x1", "y0", "y1", "lambda_xx", "lambda_xy", "lambda_yy", "vx", "vy",
        "solution", "source", "source_value", "dirichlet_value", "neumann_value", "mean_value",
    } | {f"boundary_{s}" for s in _SIDES}
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    bounds = tuple(_float(cfg, k, d) for k, d in (("x0", 0), ("x1", 1), ("y0", 0), ("y1", 1)))
    lxy = _float(cfg, "lambda_xy", 0.0)
    tensor = np.array([[_float(cfg, "lambda_xx", 1.0), lxy], [lxy, _float(cfg, "lambda_yy", 1.0)]])
    velocity = np.array([_float(cfg, "vx", 0.0), _float(cfg, "vy", 0.0)])

    kinds = {}
    for side in _SIDES:
        kind = cfg.get(f"boundary_{side}", "dirichlet").lower()
        if kind not in ("dirichlet", "neumann"):
            raise ConfigError(f"boundary_{side}: expected dirichlet or neumann, got {kind!r}")
        kinds[side] = kind
    x0, x1, y0, y1 = bounds
    tol = 1e-12 * max(x1 - x0, y1 - y0)

    def is_neumann(x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        flags = np.zeros(np.shape(x), dtype=bool)
        for side, hit in (
            ("west", np.abs(x - x0) < tol),
            ("east", np.abs(x - x1) < tol),
            ("south", np.abs(y - y0) < tol),
            ("north", np.abs(y - y1) < tol),
        ):
            if kinds[side] == "neumann":
                flags |= hit
        return flags

    mean = cfg.get("mean_value")
    mean_value = None if mean is None else _float(cfg, "mean_value", 0.0)
    solution = cfg.get("solution", "none").lower()
    source_kind = cfg.get("source", "manufactured" if solution != "none" else "zero").lower()
    common = dict(is_neumann=is_neumann, mean_value=mean_value, name=cfg.get("name", "custom"))

    if solution != "none":
        if solution not in SOLUTIONS:
            raise ConfigError(f"solution: expected one of {sorted(SOLUTIONS)} or none")
        if source_kind != "manufactured":
            raise ConfigError("a prescribed solution requires source = manufactured")
        spec = manufactured_problem(tensor, velocity, SOLUTIONS[solution], **common)
    else:
        if source_kind == "zero":
            s_val = 0.0
        elif source_kind == "constant":
            s_val = _float(cfg, "source_value", 1.0)
        else:
            raise ConfigError(f"source: expected zero or constant without a solution, got {source_kind!r}")
        g, h = _float(cfg, "dirichlet_value", 0.0), _float(cfg, "neumann_value", 0.0)
        spec = ProblemSpec(
            diffusion=_const_tensor(tensor),
            velocity=_const_vector(velocity),
            source=lambda x, y: np.full(np.shape(x), s_val),
            dirichlet=lambda x, y: np.full(np.shape(x), g),
            neumann=lambda x, y, n: np.full(np.shape(x), h),
            **common,
        )
    return build_mesh(nx, ny or nx, bounds), spec


def load_case_file(path, nx: int, ny: int | None = None):
    with open(path, encoding="utf-8") as fh:
        return case_from_config(parse_case_file(fh.read()), nx, ny)
