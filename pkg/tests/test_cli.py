"""Exit codes, error reporting, artifacts, and determinism of the CLI."""

import csv
import json
import math
import subprocess
import sys

import pytest

from planarmap.cli import main


def run_cli(capsys, *argv):
    rc = main(list(argv))
    cap = capsys.readouterr()
    return rc, cap.out, cap.err


def stderr_error(err_text):
    lines = [ln for ln in err_text.strip().splitlines() if ln.strip()]
    assert len(lines) == 1, f"expected one-line JSON error, got {err_text!r}"
    payload = json.loads(lines[0])
    assert "schema_version" in payload
    return payload["error"]


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_no_map_is_usage_error(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "critical", "--out", str(tmp_path))
    assert rc == 2
    assert stderr_error(err)["kind"] == "usage"


def test_unknown_map_lists_builtins(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "analyze", "--map", "nope",
                         "--out", str(tmp_path))
    assert rc == 2
    e = stderr_error(err)
    assert e["kind"] == "usage"
    assert "ex1-nono" in e["message"]


def test_bad_window_is_usage_error(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "critical", "--map", "ex1-nono",
                         "--window", "1:2:3", "--out", str(tmp_path))
    assert rc == 2
    assert stderr_error(err)["kind"] == "usage"


def test_u_without_v_is_usage_error(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "analyze", "--u", "x", "--out", str(tmp_path))
    assert rc == 2
    assert stderr_error(err)["kind"] == "usage"


def test_decreasing_radii_is_usage_error(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "cluster", "--map", "ex1-nono",
                         "--radii", "100,10,1000", "--out", str(tmp_path))
    assert rc == 2
    assert stderr_error(err)["kind"] == "usage"


def test_analyze_accepts_dash_window_values(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "analyze", "--map", "ex2-bloch",
                         "--window", "-1:1:-1:1", "--out", str(tmp_path))
    assert rc == 0 and err == ""
    data = json.loads((tmp_path / "analyze.json").read_text())
    assert data["max_abs_laplacian_u"] < 1e-5
    assert data["max_abs_laplacian_v"] < 1e-5
    assert len(data["spot_checks"]) == 25


def test_analyze_inline_expressions(tmp_path, capsys):
    rc, _, _ = run_cli(capsys, "analyze", "--u", "x^2 - y^2", "--v", "2*x*y",
                       "--out", str(tmp_path))
    assert rc == 0
    data = json.loads((tmp_path / "analyze.json").read_text())
    assert data["map"] == "user"
    assert data["max_abs_laplacian_u"] < 1e-5


def test_critical_writes_artifacts(tmp_path, capsys):
    rc, _, _ = run_cli(capsys, "critical", "--map", "ex6-imexp",
                       "--window", "-3:3:-3:3", "--grid", "120",
                       "--out", str(tmp_path))
    assert rc == 0
    header, rows = read_csv(tmp_path / "S.csv")
    assert header == ["polyline-id", "x", "y"]
    assert rows
    for name in ("fS.csv", "S.svg", "fS.svg"):
        assert (tmp_path / name).exists()
    svg = (tmp_path / "S.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_valence_map_counts(tmp_path, capsys):
    rc, _, _ = run_cli(capsys, "valence-map", "--map", "zsquared",
                       "--wwindow", "0.25:1:0.25:1", "--grid", "8",
                       "--window", "-3:3:-3:3", "--out", str(tmp_path))
    assert rc == 0
    header, rows = read_csv(tmp_path / "valence.csv")
    assert header == ["i", "j", "cx", "cy", "count", "boundary"]
    assert len(rows) == 64
    assert all(r[4] == "2" for r in rows)
    assert (tmp_path / "valence.svg").exists()


def test_lift_artifacts_and_missing_gamma(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "lift", "--map", "zsquared",
                         "--out", str(tmp_path))
    assert rc == 2
    assert stderr_error(err)["kind"] == "usage"

    rc, _, _ = run_cli(capsys, "lift", "--map", "zsquared",
                       "--gamma", "1,0;4,0", "--window", "-4:4:-4:4",
                       "--out", str(tmp_path))
    assert rc == 0
    data = json.loads((tmp_path / "lift.json").read_text())
    complete = [lf for lf in data["lifts"] if lf["status"] == "complete"]
    assert len(complete) == 2
    ends = sorted(lf["end"][0] for lf in complete)
    assert abs(ends[0] + 2.0) < 1e-6 and abs(ends[1] - 2.0) < 1e-6
    _, rows = read_csv(tmp_path / "lift.csv")
    assert rows


def test_bloch_check_pass(tmp_path, capsys):
    c1 = 7.0 * math.pi / 2.0
    pt = f"{math.log(c1)},{c1}"
    rc, _, err = run_cli(capsys, "bloch-check", "--map", "ex2-bloch",
                         "--points", pt, "--window", "-1:6:0:40",
                         "--grid", "140", "--out", str(tmp_path))
    assert rc == 0 and err == ""
    cert = json.loads((tmp_path / "certificate.json").read_text())["certificate"]
    assert cert["pass"] is True
    assert cert["M"] < 0.51


def test_bloch_check_failure_exit_code(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "bloch-check", "--u", "x", "--v", "-y",
                         "--points", "0.5,0.5", "--window", "-2:2:-2:2",
                         "--grid", "40", "--out", str(tmp_path))
    assert rc == 1
    e = stderr_error(err)
    assert e["kind"] == "certificate-failed"
    assert e["violations"]
    cert = json.loads((tmp_path / "certificate.json").read_text())["certificate"]
    assert cert["pass"] is False


def test_trace_needs_w0(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "trace", "--map", "ex5-quadline",
                         "--out", str(tmp_path))
    assert rc == 2
    assert stderr_error(err)["kind"] == "usage"


def test_trace_failure_still_writes_report(tmp_path, capsys):
    rc, _, err = run_cli(capsys, "trace", "--map", "identity",
                         "--w0", "0.5,0", "--window", "-8:8:-8:8",
                         "--grid", "64", "--out", str(tmp_path))
    assert rc == 1
    assert stderr_error(err)["kind"] in ("inconclusive", "precondition-failed")
    report = json.loads((tmp_path / "report.json").read_text())["report"]
    assert report["verdict"] in ("inconclusive", "precondition-failed")
    assert (tmp_path / "endcut.svg").exists()
    assert (tmp_path / "lift.svg").exists()


def test_cluster_csv_byte_identical(tmp_path, capsys):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        rc, _, _ = run_cli(capsys, "cluster", "--map", "ex1-nono",
                           "--radii", "10,100,1000", "--grid", "200",
                           "--out", str(out))
        assert rc == 0
    b1 = (out1 / "cluster.csv").read_bytes()
    b2 = (out2 / "cluster.csv").read_bytes()
    assert b1 == b2
    assert b"\r" not in b1


def test_module_entrypoint(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "planarmap", "analyze", "--map", "identity",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "analyze.json").exists()
