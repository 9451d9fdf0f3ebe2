"""Pure-numpy assembly kernels.

Reference implementation of the compiled kernels in ``_ckernels.pyx``.
Both emit COO triplets in the same fixed slot layout, so the sparse
matrices they produce are identical bit for bit.

Cell rows use ``CELL_SLOTS`` slots per cell: 20 for the homogeneous
fluxes (local edge ``s``, local dof ``j``), then, for the complete-flux
scheme, 80 for the cross-fluxes (local edge ``s``, cross edge ``c``, side
K then L, local dof ``j``).  Edge rows use ``EDGE_SLOTS`` slots per edge.
"""

import numpy as np

CROSS = np.array([[3, 2], [3, 2], [1, 0], [1, 0]])
CELL_SLOTS_HF = 20
CELL_SLOTS = 100
EDGE_SLOTS = 10

KIND_INTERIOR, KIND_DIRICHLET, KIND_NEUMANN = 0, 1, 2


def cell_row_triplets(dofs, H, nbr, wk, wl, complete):
    nc = dofs.shape[0]
    slots = CELL_SLOTS if complete else CELL_SLOTS_HF
    rows = np.repeat(np.arange(nc, dtype=np.int64), slots).reshape(nc, slots)
    cols = np.empty((nc, slots), dtype=np.int64)
    vals = np.empty((nc, slots))

    cols[:, :20] = np.repeat(dofs[:, None, :], 4, axis=1).reshape(nc, 20)
    vals[:, :20] = H.reshape(nc, 20)

    if complete:
        interior = nbr >= 0
        safe = np.where(interior, nbr, 0)
        # (nc, 4, 2, 5) homogeneous forms of the cross edges
        hk = H[:, CROSS, :]
        hl = H[safe[:, :, None], CROSS[None, :, :], :]
        ck = -wk[..., None] * hk
        cl = wl[..., None] * hl
        ck = np.where(interior[:, :, None, None], ck, 0.0)
        cl = np.where(interior[:, :, None, None], cl, 0.0)
        block_v = np.stack([ck, cl], axis=3)  # (nc, 4, 2, 2, 5)
        dk = np.broadcast_to(dofs[:, None, None, :], (nc, 4, 2, 5))
        dl = np.broadcast_to(dofs[safe][:, :, None, :], (nc, 4, 2, 5))
        block_c = np.stack([dk, dl], axis=3)
        vals[:, 20:] = block_v.reshape(nc, 80)
        cols[:, 20:] = block_c.reshape(nc, 80)
    return rows.ravel(), cols.ravel(), vals.ravel()


def edge_row_triplets(n_cells, edge_cells, edge_local, kind, dofs, H, D):
    ne = edge_cells.shape[0]
    rows = np.repeat(np.arange(n_cells, n_cells + ne, dtype=np.int64), EDGE_SLOTS).reshape(ne, EDGE_SLOTS)
    cols = np.repeat(rows[:, :1], EDGE_SLOTS, axis=1).copy()
    vals = np.zeros((ne, EDGE_SLOTS))

    for side in (0, 1):
        k = edge_cells[:, side]
        s = edge_local[:, side]
        sel = (kind == KIND_INTERIOR) | ((kind == KIND_NEUMANN) & (k >= 0))
        ks, ss = k[sel], s[sel]
        forms = np.where((kind[sel] == KIND_INTERIOR)[:, None], H[ks, ss], D[ks, ss])
        block = slice(5 * side, 5 * side + 5)
        vals[sel, block] = forms
        cols[sel, block] = dofs[ks]

    vals[kind == KIND_DIRICHLET, 0] = 1.0
    return rows.ravel(), cols.ravel(), vals.ravel()
