"""Compare the compiled and numpy assembly kernels.

    python3 benchmarks/bench_kernels.py [--sizes 64,128,256] [--repeat 5]

For each resolution the cell-row and edge-row kernels are timed with both
backends on the same tc2 inputs and their outputs compared bitwise.  One
full assemble + solve is timed for scale.
"""

from __future__ import annotations

import argparse
import time
import timeit

import numpy as np

from gcflux import kernels
from gcflux.assembly import assemble, discretise, edge_local_indices, solve
from gcflux.cases import builtin_case


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench(nx: int, repeat: int) -> dict:
    mesh, spec = builtin_case("tc2", nx)
    d = discretise(mesh, spec, "cf")
    H, D = d.forms.H, d.forms.D
    wk, wl = d.inhomogeneous.wk, d.inhomogeneous.wl
    edge_args = (mesh.n_cells, mesh.edge_cells, edge_local_indices(mesh), d.edge_kind, mesh.cell_dofs, H, D)

    row = {"nx": nx}
    outputs = {}
    for impl in kernels.available_backends():
        def cells(impl=impl):
            return kernels.cell_row_triplets(mesh.cell_dofs, H, mesh.neighbors, wk, wl, True, impl=impl)

        def edges(impl=impl):
            return kernels.edge_row_triplets(*edge_args, impl=impl)

        outputs[impl] = (cells(), edges())
        row[f"{impl}_cells"] = _best(cells, repeat)
        row[f"{impl}_edges"] = _best(edges, repeat)
    if len(outputs) == 2:
        a, b = outputs["cython"], outputs["python"]
        row["identical"] = all(np.array_equal(x, y) for pa, pb in zip(a, b) for x, y in zip(pa, pb))

    t0 = time.perf_counter()
    system = assemble(mesh, spec)
    t1 = time.perf_counter()
    solve(system)
    row["assemble"] = t1 - t0
    row["solve"] = time.perf_counter() - t1
    return row


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="64,128,256")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    head = f"{'nx':>5}"
    for impl in backends:
        head += f" {impl + ' cells':>13} {impl + ' edges':>13}"
    if len(backends) == 2:
        head += f" {'speedup':>8} {'same':>5}"
    head += f" {'assemble':>9} {'solve':>8}"
    print(head)
    for nx in (int(s) for s in args.sizes.split(",")):
        r = bench(nx, args.repeat)
        line = f"{nx:>5}"
        for impl in backends:
            line += f" {r[impl + '_cells']:>12.4f}s {r[impl + '_edges']:>12.4f}s"
        if len(backends) == 2:
            fast = r["cython_cells"] + r["cython_edges"]
            slow = r["python_cells"] + r["python_edges"]
            line += f" {slow / fast:>7.1f}x {str(r['identical']):>5}"
        line += f" {r['assemble']:>8.3f}s {r['solve']:>7.3f}s"
        print(line, flush=True)


if __name__ == "__main__":
    main()
