"""Command-line interface: ``gcflux run`` and ``gcflux convergence``.

Exit codes are 0 on success, 1 for usage errors and 2 for errors raised
while building or solving a case.  Errors are reported on stderr as one
JSON line ``{"error": <code>, "message": <text>}``.

``GCFLUX_NUM_THREADS`` sets the number of worker processes used to solve
the levels of a convergence study concurrently (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from .analysis import ConvergenceReport, error_l1_relative, export, field_stats
from .assembly import SCHEMES, solve_problem
from .cases import CASES, builtin_case, load_case_file
from .errors import ConfigError, GCFluxError, IoError
from .transport import LAMBDA_VARIANTS, PECLET_VARIANTS

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2
THREADS_ENV = "GCFLUX_NUM_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    case: str | None
    nx: int
    variant: str | None = None
    case_file: str | None = None
    scheme: str = "cf"
    peclet: str = "grid"
    lam: str = "grid"
    field: str | None = None
    format: str = "csv"
    summary: str | None = None
    tol: float = 1e-10

    def validate(self) -> "RunConfig":
        if (self.case is None) == (self.case_file is None):
            raise UsageError("exactly one of --case and --case-file is required")
        if self.nx < 1:
            raise UsageError("--nx must be positive")
        if self.variant is not None and self.case != "tc4":
            raise UsageError("--variant applies to tc4 only")
        if not self.tol > 0:
            raise UsageError("--tol must be positive")
        return self

    @property
    def label(self) -> str:
        name = self.case or Path(self.case_file).stem
        if self.variant:
            name += f"-{self.variant}"
        return name

    def build(self):
        if self.case_file is not None:
            return load_case_file(self.case_file, self.nx)
        return builtin_case(self.case, self.nx, self.variant)


def _solve(cfg: RunConfig):
    mesh, spec = cfg.build()
    sol = solve_problem(mesh, spec, cfg.scheme, cfg.peclet, cfg.lam, tol=cfg.tol)
    return mesh, spec, sol


def _level_error(cfg: RunConfig) -> float:
    mesh, spec, sol = _solve(cfg)
    return error_l1_relative(sol, spec, mesh)


def _summary_row(cfg: RunConfig, stats, e1, label=None) -> dict:
    return {
        "case": label or cfg.label,
        "nx": cfg.nx,
        "scheme": cfg.scheme,
        "peclet": cfg.peclet,
        "lambda": cfg.lam,
        "min": f"{stats.min:.10e}",
        "max": f"{stats.max:.10e}",
        "negative_fraction": f"{stats.negative_cell_fraction:.6f}",
        "E1": "" if e1 is None else f"{e1:.4e}",
    }


def _write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="ascii")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    mesh, spec, sol = _solve(cfg)
    stats = field_stats(sol, mesh)
    e1 = error_l1_relative(sol, spec, mesh) if spec.exact is not None else None
    if cfg.field:
        export(sol, mesh, cfg.field, cfg.format)
    # case files name themselves; the file stem is the fallback
    label = spec.name if cfg.case_file is not None and spec.name != "custom" else None
    row = _summary_row(cfg, stats, e1, label)
    if cfg.summary:
        _write_text(cfg.summary, _csv_text(list(row), [list(row.values())]))
    print(" ".join(f"{k}={v}" for k, v in row.items() if v != ""), file=out)
    return EXIT_OK


def cmd_convergence(cfg: RunConfig, levels, output=None, out=None) -> int:
    out = out or sys.stdout
    levels = [int(n) for n in levels]
    if len(levels) < 2 or any(b != 2 * a for a, b in zip(levels, levels[1:])):
        raise UsageError("--levels must hold at least two doubling resolutions")
    configs = [replace(cfg, nx=n).validate() for n in levels]
    workers = _threads()
    if workers > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(configs))) as pool:
            errors = list(pool.map(_level_error, configs))
    else:
        errors = [_level_error(c) for c in configs]
    report = ConvergenceReport(tuple(zip(levels, errors)))
    rows = [(f"{n}x{n}", f"{e:.4e}", "" if o is None else f"{o:.4f}") for n, e, o in report.rows()]
    text = _csv_text(("mesh", "E1", "order"), rows)
    if output:
        _write_text(output, text)
    out.write(text)
    return EXIT_OK


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    return max(n, 1)


def _add_common(p: argparse.ArgumentParser, nx_required: bool) -> None:
    src = p.add_argument_group("case")
    src.add_argument("--case", choices=CASES)
    src.add_argument("--case-file", help="plain-text 'key = value' case description")
    src.add_argument("--variant", choices=("ccw", "cw"), help="tc4 velocity orientation")
    if nx_required:
        src.add_argument("--nx", type=int, required=True, help="cells per axis")
    num = p.add_argument_group("discretisation")
    num.add_argument("--scheme", choices=SCHEMES, default="cf")
    num.add_argument("--peclet", choices=PECLET_VARIANTS, default="grid")
    num.add_argument("--lambda", dest="lam", choices=LAMBDA_VARIANTS, default="grid")
    num.add_argument("--tol", type=float, default=1e-10, help="relative residual tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gcflux", description="Complete-flux finite-volume solver")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="solve one case and report field statistics")
    _add_common(run, nx_required=True)
    run.add_argument("--field", help="path of the exported cell field")
    run.add_argument("--format", choices=("csv", "vtk-legacy"), default="csv")
    run.add_argument("--summary", help="path of the one-row CSV summary")

    conv = sub.add_parser("convergence", help="relative L1 errors over doubling meshes")
    _add_common(conv, nx_required=False)
    conv.add_argument("--levels", default="16,32,64,128", help="comma-separated doubling resolutions")
    conv.add_argument("--output", help="path of the CSV table")
    return parser


def _config(args, nx) -> RunConfig:
    return RunConfig(
        case=args.case,
        nx=nx,
        variant=args.variant,
        case_file=args.case_file,
        scheme=args.scheme,
        peclet=args.peclet,
        lam=args.lam,
        field=getattr(args, "field", None),
        format=getattr(args, "format", "csv"),
        summary=getattr(args, "summary", None),
        tol=args.tol,
    ).validate()


def _report(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "run":
            return cmd_run(_config(args, args.nx))
        try:
            levels = [int(v) for v in args.levels.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"--levels: {exc}") from exc
        if not levels:
            raise UsageError("--levels is empty")
        return cmd_convergence(_config(args, levels[0]), levels, args.output)
    except UsageError as exc:
        _report("UsageError", str(exc))
        return EXIT_USAGE
    except ConfigError as exc:
        _report(exc.code, str(exc))
        return EXIT_USAGE
    except GCFluxError as exc:
        _report(exc.code, str(exc))
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
