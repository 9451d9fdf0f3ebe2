# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernels; slot layout documented in ``_pykernels``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

DEF CELL_SLOTS_HF = 20
DEF CELL_SLOTS = 100
DEF EDGE_SLOTS = 10

cdef int[4][2] CROSS = [[3, 2], [3, 2], [1, 0], [1, 0]]


def cell_row_triplets(cnp.int64_t[:, ::1] dofs, double[:, :, ::1] H,
                      cnp.int64_t[:, ::1] nbr, double[:, :, ::1] wk,
                      double[:, :, ::1] wl, bint complete):
    cdef Py_ssize_t nc = dofs.shape[0]
    cdef Py_ssize_t slots = CELL_SLOTS if complete else CELL_SLOTS_HF
    rows_a = np.empty(nc * slots, dtype=np.int64)
    cols_a = np.empty(nc * slots, dtype=np.int64)
    vals_a = np.empty(nc * slots, dtype=np.float64)
    cdef cnp.int64_t[::1] rows = rows_a
    cdef cnp.int64_t[::1] cols = cols_a
    cdef double[::1] vals = vals_a
    cdef Py_ssize_t k, s, j, c, p, L, Lc, a
    cdef double fk, fl

    with nogil:
        for k in range(nc):
            p = k * slots
            for s in range(4):
                for j in range(5):
                    rows[p] = k
                    cols[p] = dofs[k, j]
                    vals[p] = H[k, s, j]
                    p += 1
            if not complete:
                continue
            for s in range(4):
                L = nbr[k, s]
                for c in range(2):
                    a = CROSS[s][c]
                    if L >= 0:
                        Lc = L
                        fk = -wk[k, s, c]
                        fl = wl[k, s, c]
                    else:
                        Lc = 0
                        fk = 0.0
                        fl = 0.0
                    for j in range(5):
                        rows[p] = k
                        cols[p] = dofs[k, j]
                        vals[p] = fk * H[k, a, j]
                        p += 1
                    for j in range(5):
                        rows[p] = k
                        cols[p] = dofs[Lc, j]
                        vals[p] = fl * H[Lc, a, j]
                        p += 1
    return rows_a, cols_a, vals_a


def edge_row_triplets(Py_ssize_t n_cells, cnp.int64_t[:, ::1] edge_cells,
                      cnp.int64_t[:, ::1] edge_local, cnp.int8_t[::1] kind,
                      cnp.int64_t[:, ::1] dofs, double[:, :, ::1] H,
                      double[:, :, ::1] D):
    cdef Py_ssize_t ne = edge_cells.shape[0]
    rows_a = np.empty(ne * EDGE_SLOTS, dtype=np.int64)
    cols_a = np.empty(ne * EDGE_SLOTS, dtype=np.int64)
    vals_a = np.zeros(ne * EDGE_SLOTS, dtype=np.float64)
    cdef cnp.int64_t[::1] rows = rows_a
    cdef cnp.int64_t[::1] cols = cols_a
    cdef double[::1] vals = vals_a
    cdef Py_ssize_t e, side, j, p, k, s, r

    with nogil:
        for e in range(ne):
            r = n_cells + e
            p = e * EDGE_SLOTS
            for j in range(EDGE_SLOTS):
                rows[p + j] = r
                cols[p + j] = r
            if kind[e] == 1:
                vals[p] = 1.0
                continue
            for side in range(2):
                k = edge_cells[e, side]
                if k < 0:
                    continue
                s = edge_local[e, side]
                for j in range(5):
                    cols[p + 5 * side + j] = dofs[k, j]
                    if kind[e] == 0:
                        vals[p + 5 * side + j] = H[k, s, j]
                    else:
                        vals[p + 5 * side + j] = D[k, s, j]
    return rows_a, cols_a, vals_a
