"""Escape certification and the end-to-end asymptote pipeline."""

import numpy as np
import pytest

from planarmap import TraceConfig, divergence_check, trace_asymptote
from planarmap.asymptote import precondition_scan
from planarmap.critical import Window
from planarmap.paths import PolyPath


def path_of(*pts):
    return PolyPath(np.asarray(pts, dtype=float))


def test_divergence_check_certifies_outward_path():
    t = np.linspace(0.5, 20.0, 40)
    lift = PolyPath(np.column_stack([t, 0.1 * t]))
    ok, escape = divergence_check(lift, (1.0, 2.0, 4.0, 8.0))
    assert ok
    assert escape == [1.0, 2.0, 4.0, 8.0]


def test_divergence_check_rejects_double_dip():
    lift = path_of((0.5, 0.0), (4.0, 0.0), (1.0, 0.0), (6.0, 0.0),
                   (2.0, 0.0), (8.0, 0.0))
    ok, escape = divergence_check(lift, (3.0, 7.0))
    assert not ok
    assert escape == [7.0]


def test_divergence_check_counts_segment_dips():
    # both endpoints outside radius 1, but the chord passes near 0 twice
    lift = path_of((-5.0, 0.1), (5.0, 0.1), (-5.0, 0.2))
    ok, escape = divergence_check(lift, (1.0,))
    assert not ok
    assert escape == []


def test_divergence_check_needs_final_point_outside():
    lift = path_of((0.5, 0.0), (6.0, 0.0), (2.0, 0.0))
    ok, escape = divergence_check(lift, (4.0,))
    assert not ok
    assert escape == []


def test_divergence_check_radii_validation():
    lift = path_of((0.5, 0.0), (6.0, 0.0))
    with pytest.raises(ValueError):
        divergence_check(lift, (4.0, 2.0))


def test_precondition_scan_validation(maps):
    with pytest.raises(ValueError):
        precondition_scan(maps["identity"], (0.0, 0.0), 0.0,
                          Window(-2.0, 2.0, -2.0, 2.0, 32, 32))


def test_trace_ex5_reports_evidence(maps):
    cfg = TraceConfig(
        zwindow=Window(-256.0, 256.0, -256.0, 256.0, 256, 256),
        escape_radii=(2.0, 8.0, 32.0, 100.0),
        n_points=10, r_start=2.0, growth=2.0, run_scan=False,
    )
    rep = trace_asymptote(maps["ex5-quadline"], (3.0, 0.0), cfg)
    assert rep.verdict == "asymptotic-evidence"
    assert rep.escape_radii == [2.0, 8.0, 32.0, 100.0]
    assert rep.chosen_lift is not None
    assert rep.diagnostics["final_z_modulus"] > 100.0
    assert rep.end_cut_status in ("complete", "stalled")
    assert rep.schedule.law_violations() == []


def test_trace_fails_inside_cluster_interior(maps):
    cfg = TraceConfig(
        zwindow=Window(-8.0, 8.0, -8.0, 8.0, 256, 256),
        eps=0.5, escape_radii=(2.0, 4.0, 8.0),
        n_points=6, growth=2.0, max_stages=4, run_scan=True,
    )
    rep = trace_asymptote(maps["ex1-nono"], (1.0, 0.5), cfg)
    assert rep.verdict == "precondition-failed"
    assert rep.scan is not None and rep.scan.has_interior_block
    assert "interior" in rep.diagnostics["failure"]
    assert any("interior" in note for note in rep.precondition_findings)


def test_trace_sequence_stage_failure_is_inconclusive(maps):
    cfg = TraceConfig(
        zwindow=Window(-4.0, 4.0, -4.0, 4.0, 64, 64),
        run_scan=False,
    )
    rep = trace_asymptote(maps["identity"], (0.5, 0.0), cfg)
    assert rep.verdict == "inconclusive"
    assert rep.diagnostics["failure"].startswith("sequence stage:")
    assert rep.chosen_lift is None
