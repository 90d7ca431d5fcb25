"""Sequence certificates, schlicht-disk checks, and the failure dichotomy."""

import math

import numpy as np
import pytest

from planarmap import (
    check_conditions,
    cgh_radii,
    diagnose_sequence,
    normalized_map,
    planar_map,
    schlicht_disk_verify,
)
from planarmap.bloch import bloch_radius_k
from planarmap.critical import Window
from planarmap.field import Point


def ex2_sequence(k_max=5):
    ck = (4.0 * np.arange(1, k_max + 1) + 3.0) * math.pi / 2.0
    return np.column_stack([np.log(ck), ck])


def test_identity_certificate_exact_constants(maps):
    win = Window(-2.0, 2.0, -2.0, 2.0, 60, 60)
    cert = check_conditions(maps["identity"], [(0.0, 0.0), (1.0, 0.0)], 0.5, win)
    assert cert.passed
    assert cert.violations == ()
    assert cert.delta == math.inf
    assert cert.M == 0.0
    assert cert.K == 1.0
    assert abs(cert.j_ratio_sup - 1.0) < 1e-12
    assert abs(cert.Lambda - 1.0) < 1e-12
    assert abs(cert.r0 - math.pi / 16.0) < 1e-12
    assert abs(cert.r1 - 0.5 * math.pi / 16.0) < 1e-12
    assert cert.metadata["qr_max_excess"] <= 1e-12


def test_ex2_certificate_passes(maps):
    win = Window(-1.0, 6.0, 0.0, 40.0, 140, 140)
    seq = ex2_sequence()
    cert = check_conditions(maps["ex2-bloch"], seq, math.log(2.0) / 2.0, win)
    assert cert.passed
    assert cert.delta > 0.0
    assert cert.M < 0.51
    assert cert.K < 3.01
    # eta_sq is J at the first point, e^x (e^x + cos y) = (7 pi / 2)^2
    c1 = 7.0 * math.pi / 2.0
    assert abs(cert.eta_sq - c1 * c1) <= 1e-9 * c1 * c1
    assert cert.r1 > 0.0


def test_check_conditions_validation(maps):
    win = Window(-1.0, 1.0, -1.0, 1.0, 20, 20)
    with pytest.raises(ValueError):
        check_conditions(maps["identity"], [(0.0, 0.0)], 0.0, win)
    with pytest.raises(ValueError):
        check_conditions(maps["identity"], [], 0.5, win)


def test_nonpositive_jacobian_paths():
    flip = planar_map("x", "-y", "flip")
    win = Window(-2.0, 2.0, -2.0, 2.0, 40, 40)
    seq = [(0.5, 0.5)]

    cert = check_conditions(flip, seq, 0.25, win)
    assert not cert.passed
    kinds = {v["kind"] for v in cert.violations}
    assert "nonpositive-jacobian" in kinds
    assert cert.j_ratio_sup == math.inf

    fixed = check_conditions(flip, seq, 0.25, win,
                             on_nonpositive_jacobian="conjugate-flip")
    assert fixed.passed
    assert fixed.M == 0.0 and fixed.K == 1.0

    with pytest.raises(ValueError):
        check_conditions(flip, seq, 0.25, win,
                         on_nonpositive_jacobian="subsequence")


def test_subsequence_repair_drops_bad_points():
    fold = planar_map("x^2/2", "y", "fold")  # J = x
    win = Window(-2.0, 2.0, -2.0, 2.0, 80, 80)
    seq = [(1.0, 0.0), (-1.0, 0.0)]
    cert = check_conditions(fold, seq, 0.25, win,
                            on_nonpositive_jacobian="subsequence")
    assert cert.passed
    assert cert.metadata["n_points"] == 1
    assert abs(cert.eta_sq - 1.0) < 1e-9

    recorded = check_conditions(fold, seq, 0.25, win)
    bad = [v for v in recorded.violations if v["kind"] == "nonpositive-jacobian"]
    assert bad and bad[0]["indices"] == [1]
    assert set(bad[0]["options"]) == {"conjugate-flip", "subsequence"}


def test_cgh_radii():
    rho0, r0 = cgh_radii(1.0)
    assert abs(rho0 - math.pi / 8.0) < 1e-15
    assert abs(r0 - math.pi / 16.0) < 1e-15
    assert cgh_radii(10.0)[0] < rho0
    with pytest.raises(ValueError):
        cgh_radii(0.5)


def test_bloch_radius_k():
    assert abs(bloch_radius_k(1.0) - math.pi / (24.0 * math.sqrt(2.0))) < 1e-15
    assert bloch_radius_k(4.0) < bloch_radius_k(1.0)
    with pytest.raises(ValueError):
        bloch_radius_k(0.9)


def test_schlicht_disk_identity_full_coverage(maps):
    rep = schlicht_disk_verify(maps["identity"], Point(0.0, 0.0), 0.3, 0.1)
    assert rep.hit_fraction == 1.0
    assert rep.max_residual <= 1e-10
    assert rep.n_targets == rep.n_hits
    assert rep.center == Point(0.0, 0.0)


def test_schlicht_disk_ball_constraint_limits_hits(maps):
    # targets beyond the seed ball radius cannot be attained inside it
    rep = schlicht_disk_verify(maps["identity"], Point(0.0, 0.0), 0.05, 0.2)
    assert 0.0 < rep.hit_fraction < 1.0


def test_schlicht_disk_validation(maps):
    with pytest.raises(ValueError):
        schlicht_disk_verify(maps["identity"], Point(0.0, 0.0), 0.3, 0.0)


def test_normalized_map_zsquared(maps):
    nm = normalized_map(maps["zsquared"], Point(1.0, 0.0), 0.1)
    u, v = nm.evaluate_grid([0.0], [0.0])
    assert abs(u[0]) < 1e-10 and abs(v[0]) < 1e-10
    assert abs(nm.lambda_at_origin() - 1.0) < 1e-10
    # J_F(0) = J_f(zn) / lambda_f(zn)^2 = 4 / 4
    assert abs(nm.jacobian_at_origin() - 1.0) < 1e-10


def test_normalized_map_rejects_critical_base_point(maps):
    with pytest.raises(ValueError):
        normalized_map(maps["zsquared"], Point(0.0, 0.0), 0.1)


def test_diagnose_ex2_sequence_clean(maps):
    win = Window(-1.0, 6.0, 0.0, 40.0, 140, 140)
    rep = diagnose_sequence(maps["ex2-bloch"], ex2_sequence(),
                            (math.log(2.0) / 2.0,), win)
    assert rep.conditions == {1: False, 2: False, 3: False, 4: False}
    assert not rep.any_hold()
    assert rep.note is not None


def test_diagnose_flags_critical_approach(maps):
    # points on the contour x = -y tan y get condition 1
    ys = np.asarray([0.3, 0.5, 0.7, 0.9])
    seq = np.column_stack([-ys * np.tan(ys), ys])
    win = Window(-4.0, 4.0, -4.0, 4.0, 200, 200)
    rep = diagnose_sequence(maps["ex1-nono"], seq, (0.25,), win)
    assert rep.conditions[1] is True
    assert rep.any_hold()
    assert rep.note is None


def test_diagnose_flags_orientation_and_dilatation():
    flip = planar_map("x", "-y", "flip")
    win = Window(-2.0, 2.0, -2.0, 2.0, 40, 40)
    rep = diagnose_sequence(flip, [(0.5, 0.5), (1.0, 1.0)], (0.1, 0.2), win)
    assert rep.conditions[3] is True
    assert rep.conditions[4] is True
