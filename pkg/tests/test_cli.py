import json
import subprocess
import sys

import pytest

from gcflux.analysis import read_csv
from gcflux.cli import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, RunConfig, UsageError, main


def _error(capsys):
    err = capsys.readouterr().err.strip().splitlines()[-1]
    return json.loads(err)


def _stats(line):
    return dict(kv.split("=", 1) for kv in line.split())


def test_run_tc1(capsys, tmp_path):
    field, summary = tmp_path / "c.csv", tmp_path / "s.csv"
    code = main(["run", "--case", "tc1", "--nx", "16", "--scheme", "cf", "--field", str(field), "--summary", str(summary)])
    assert code == EXIT_OK
    stats = _stats(capsys.readouterr().out.strip())
    assert stats["E1"] == "2.7601e-02"
    assert set(stats) == {"case", "nx", "scheme", "peclet", "lambda", "min", "max", "negative_fraction", "E1"}
    assert read_csv(field).shape == (256, 3)
    head, row = summary.read_text().splitlines()
    assert head == "case,nx,scheme,peclet,lambda,min,max,negative_fraction,E1"
    assert row.startswith("tc1,16,cf,grid,grid,")


def test_run_tc4_without_exact(capsys, tmp_path):
    field = tmp_path / "c.vtk"
    assert main(["run", "--case", "tc4", "--variant", "cw", "--nx", "30", "--field", str(field), "--format", "vtk-legacy"]) == EXIT_OK
    stats = _stats(capsys.readouterr().out.strip())
    assert "E1" not in stats and stats["case"] == "tc4-cw"
    assert 5e-4 < float(stats["max"]) < 1e-3
    assert field.read_text().startswith("# vtk DataFile Version 3.0")


def test_resolution_incompatible(capsys):
    assert main(["run", "--case", "tc5", "--nx", "44"]) == EXIT_RUNTIME
    assert _error(capsys)["error"] == "ResolutionIncompatible"


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--nx", "8"],
        ["run", "--case", "tc1"],
        ["run", "--case", "tc1", "--nx", "8", "--scheme", "upwind"],
        ["run", "--case", "tc1", "--nx", "0"],
        ["run", "--case", "tc1", "--nx", "8", "--variant", "cw"],
        ["run", "--case", "tc1", "--case-file", "x.txt", "--nx", "8"],
        ["convergence", "--case", "tc1", "--levels", "8,24"],
        ["convergence", "--case", "tc1", "--levels", "8,a"],
        ["fly"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert _error(capsys)["error"] == "UsageError"


def test_bad_case_file(tmp_path, capsys):
    f = tmp_path / "bad.txt"
    f.write_text("lambda_xx = 1\nwhatever = 3\n")
    assert main(["run", "--case-file", str(f), "--nx", "4"]) == EXIT_USAGE
    assert _error(capsys)["error"] == "ConfigError"


def test_unwritable_output(tmp_path, capsys):
    out = tmp_path / "no" / "such" / "f.csv"
    assert main(["run", "--case", "tc1", "--nx", "4", "--field", str(out)]) == EXIT_RUNTIME
    assert _error(capsys)["error"] == "IoError"


def test_convergence_csv(tmp_path, capsys):
    out = tmp_path / "conv.csv"
    assert main(["convergence", "--case", "tc2", "--levels", "16,32", "--output", str(out)]) == EXIT_OK
    text = out.read_text()
    assert capsys.readouterr().out == text
    lines = text.splitlines()
    assert lines[0] == "mesh,E1,order"
    assert lines[1].startswith("16x16,") and lines[1].endswith(",")
    assert float(lines[2].split(",")[2]) == pytest.approx(1.9859, abs=2e-3)


def test_convergence_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["convergence", "--case", "tc3", "--peclet", "eigen", "--levels", "8,16,32", "--output", str(p)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_tc1_peclet_variants_identical_tables(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["convergence", "--case", "tc1", "--levels", "8,16", "--output", str(a)])
    main(["convergence", "--case", "tc1", "--levels", "8,16", "--peclet", "eigen", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_parallel_levels_match_serial(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["convergence", "--case", "tc2", "--levels", "8,16", "--output", str(a)])
    monkeypatch.setenv("GCFLUX_NUM_THREADS", "2")
    main(["convergence", "--case", "tc2", "--levels", "8,16", "--output", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_bad_thread_count(monkeypatch, capsys):
    monkeypatch.setenv("GCFLUX_NUM_THREADS", "many")
    assert main(["convergence", "--case", "tc1", "--levels", "4,8"]) == EXIT_USAGE


def test_case_file_convergence(tmp_path, capsys):
    f = tmp_path / "quad.txt"
    f.write_text(
        "# anisotropic manufactured case\n"
        "name = quad\n"
        "lambda_xx = 1.0\nlambda_xy = 0.25\nlambda_yy = 0.5\n"
        "vx = 3\nvy = -1   # inline comment\n"
        "solution = sinsin\n"
    )
    assert main(["run", "--case-file", str(f), "--nx", "8"]) == EXIT_OK
    assert _stats(capsys.readouterr().out)["case"] == "quad"
    assert main(["convergence", "--case-file", str(f), "--levels", "8,16,32"]) == EXIT_OK
    rows = capsys.readouterr().out.splitlines()[1:]
    orders = [float(r.split(",")[2]) for r in rows[1:]]
    assert orders[-1] > 1.9


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(case="tc1", nx=8, tol=0.0).validate()
    assert RunConfig(case="tc4", nx=9, variant="cw").label == "tc4-cw"
    assert RunConfig(case=None, case_file="/a/b/mine.txt", nx=4).label == "mine"


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "gcflux.cli", "run", "--case", "tc1", "--nx", "8"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "E1=" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "gcflux.cli", "run", "--case", "tc1"], capture_output=True, text=True)
    assert bad.returncode == 1
    assert json.loads(bad.stderr.strip())["error"] == "UsageError"
