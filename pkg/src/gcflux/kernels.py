"""Assembly kernels, compiled when available.

The Cython extension ``gcflux._ckernels`` is used if it was built and
``GCFLUX_PURE_PYTHON`` is unset or ``0``; otherwise the numpy
implementation in ``gcflux._pykernels`` is used.  ``BACKEND`` names the
active choice.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("GCFLUX_PURE_PYTHON", "0") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

KIND_INTERIOR = _pykernels.KIND_INTERIOR
KIND_DIRICHLET = _pykernels.KIND_DIRICHLET
KIND_NEUMANN = _pykernels.KIND_NEUMANN


def available_backends() -> tuple[str, ...]:
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return ("python",)
    return ("cython", "python")


def _resolve(impl):
    if impl is None:
        return _impl
    if impl == "python":
        return _pykernels
    if impl == "cython":
        from . import _ckernels

        return _ckernels
    if isinstance(impl, str):
        raise ValueError(f"unknown kernel backend {impl!r}")
    return impl


def _c(a, dtype):
    return np.ascontiguousarray(a, dtype=dtype)


def cell_row_triplets(dofs, H, nbr, wk, wl, complete, impl=None):
    impl = _resolve(impl)
    return impl.cell_row_triplets(
        _c(dofs, np.int64), _c(H, np.float64), _c(nbr, np.int64),
        _c(wk, np.float64), _c(wl, np.float64), bool(complete),
    )


def edge_row_triplets(n_cells, edge_cells, edge_local, kind, dofs, H, D, impl=None):
    impl = _resolve(impl)
    return impl.edge_row_triplets(
        int(n_cells), _c(edge_cells, np.int64), _c(edge_local, np.int64),
        _c(kind, np.int8), _c(dofs, np.int64), _c(H, np.float64), _c(D, np.float64),
    )
