"""Loop erasure, region connection, tube detours, and the end cut."""

import numpy as np
import pytest

from planarmap.critical import Window
from planarmap.geom import path_diameter, path_is_simple, polyline_point_distance
from planarmap.paths import (
    EndCutSchedule,
    PathError,
    PolyPath,
    RegionOracle,
    concat_paths,
    end_cut,
    make_simple,
    polygonal_connect,
    region_from_window,
    tube_detour,
    ulac_probe,
)


def square_region(half: float = 3.0, h: float = 1e-3) -> RegionOracle:
    win = Window(-half, half, -half, half, 64, 64)
    return region_from_window(win, h)


def test_polypath_validation():
    with pytest.raises(ValueError):
        PolyPath(np.asarray([[0.0, 0.0]]))
    with pytest.raises(ValueError):
        PolyPath(np.asarray([[0.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        PolyPath(np.asarray([[0.0, 0.0], [1.0, 0.0]]), closed=True)


def test_polypath_refined_keeps_endpoints():
    p = PolyPath(np.asarray([[0.0, 0.0], [1.0, 0.0], [1.0, 2.0]]))
    r = p.refined(2)
    assert len(r) == 5
    np.testing.assert_array_equal(r.first, p.first)
    np.testing.assert_array_equal(r.last, p.last)
    np.testing.assert_allclose(r.vertices[1], [0.5, 0.0])


def test_concat_requires_shared_junction():
    a = PolyPath(np.asarray([[0.0, 0.0], [1.0, 0.0]]))
    b = PolyPath(np.asarray([[1.0, 0.0], [1.0, 1.0]]))
    c = concat_paths(a, b)
    assert len(c) == 3
    with pytest.raises(ValueError):
        concat_paths(b, a)


def test_make_simple_erases_bow_tie():
    bow = np.asarray([[0, 0], [2, 2], [2, 0], [0, 2]], dtype=float)
    out = make_simple(bow)
    assert path_is_simple(out.vertices)
    np.testing.assert_array_equal(out.first, [0, 0])
    np.testing.assert_array_equal(out.last, [0, 2])


def test_make_simple_rejects_closed_input():
    loop = np.asarray([[0, 0], [1, 0], [1, 1], [0, 0]], dtype=float)
    with pytest.raises(PathError):
        make_simple(loop)


def test_make_simple_keeps_already_simple():
    v = np.asarray([[0, 0], [1, 0], [1, 1]], dtype=float)
    out = make_simple(v)
    np.testing.assert_array_equal(out.vertices, v)


def test_polygonal_connect_direct():
    region = square_region()
    p = polygonal_connect((-1.0, 0.0), (1.0, 0.0), region, diameter_budget=4.0)
    assert path_is_simple(p.vertices)
    assert path_diameter(p.vertices) <= 4.0


def test_polygonal_connect_around_obstacle():
    win = Window(-3.0, 3.0, -3.0, 3.0, 64, 64)

    def pred(pts):
        inside = (np.abs(pts[:, 0]) < 3.0) & (np.abs(pts[:, 1]) < 3.0)
        blocked = (np.abs(pts[:, 0]) < 0.25) & (pts[:, 1] > -1.0)
        return inside & ~blocked

    region = RegionOracle(pred, win, h=0.05)
    p = polygonal_connect((-1.0, 0.0), (1.0, 0.0), region, diameter_budget=8.0)
    assert path_is_simple(p.vertices)
    assert region.contains_points(p.vertices).all()
    # the straight segment is blocked, so the path must dip under y = -1
    assert p.vertices[:, 1].min() < -0.9


def test_polygonal_connect_budget_violation():
    region = square_region()
    with pytest.raises(PathError):
        polygonal_connect((-2.0, 0.0), (2.0, 0.0), region, diameter_budget=1.0)


def test_tube_detour_touches_only_endpoint():
    gamma = PolyPath(np.asarray([[0.0, 0.0], [1.0, 0.0], [2.0, 0.5]]))
    region = square_region(h=0.02)
    zeta = np.asarray([0.1, 0.4])
    out = tube_detour(gamma, zeta, delta0=0.6, region=region)
    assert path_is_simple(out.vertices)
    np.testing.assert_allclose(out.last, gamma.last)
    np.testing.assert_allclose(out.first, zeta)
    # interior vertices stay off gamma
    for v in out.vertices[:-1]:
        assert polyline_point_distance(gamma.vertices, v) > 0.0
    assert path_diameter(out.vertices) < path_diameter(gamma.vertices) + 2 * 0.6 + 1e-9


def test_end_cut_laws_and_simplicity():
    w0 = np.zeros(2)
    gaps = 0.05 * 32.0 ** -np.arange(8)
    seq = np.outer(gaps, [np.cos(2.4), np.sin(2.4)])
    region = square_region()
    res = end_cut(seq, w0, region, eps0=0.5, max_stages=10)
    assert res.path is not None
    assert path_is_simple(res.path.vertices)
    assert len(res.kept_indices) >= 5
    assert res.schedule.law_violations() == []
    # stage n >= 2 stays inside B(w0, (7/8) rho_{n-2})
    for n, seg in enumerate(res.segments[1:], start=2):
        r = 0.875 * res.schedule.rho[n - 2]
        assert np.hypot(seg.vertices[:, 0], seg.vertices[:, 1]).max() <= r + 1e-12


def test_end_cut_needs_an_opening_point():
    region = square_region()
    seq = np.asarray([[1.0, 0.0], [0.9, 0.0]])
    with pytest.raises(PathError):
        end_cut(seq, np.zeros(2), region, eps0=0.5)


def test_end_cut_slow_sequence_stalls_honestly():
    # decay 2x per point cannot keep up with the 16x threshold collapse
    gaps = 0.05 * 2.0 ** -np.arange(10)
    seq = np.outer(gaps, [1.0, 0.0])
    region = square_region()
    res = end_cut(seq, np.zeros(2), region, eps0=0.5, max_stages=10)
    assert res.status == "stalled"
    assert res.schedule.law_violations() == []


def test_schedule_law_violation_detection():
    sch = EndCutSchedule(eps0=0.5, delta0=0.125, rho=[0.5, 0.1], d=[0.125])
    assert sch.law_violations() == []
    sch_bad = EndCutSchedule(eps0=0.5, delta0=0.125, rho=[0.5, 0.1], d=[0.2])
    assert sch_bad.law_violations()


def test_ulac_probe_full_square_connects():
    region = square_region(h=0.05)
    score = ulac_probe(region, delta=0.3, eps_budget=1.2, trials=12, seed=1)
    assert score == 1.0
