"""Critical contours, their images, and the polyline containers."""

import numpy as np
import pytest

from planarmap import planar_map
from planarmap.critical import (
    Polyline,
    PolylineSet,
    Window,
    critical_contours,
    image_of_critical,
    nearest_critical_distance,
)


def test_window_geometry():
    w = Window(-4.0, 4.0, -2.0, 2.0, 9, 5)
    assert w.xs[0] == -4.0 and w.xs[-1] == 4.0
    assert w.cell_width == pytest.approx(1.0)
    assert w.cell_height == pytest.approx(1.0)
    assert w.cell_diagonal == pytest.approx(np.sqrt(2.0))
    assert w.contains(0.0, 0.0)
    assert not w.contains(5.0, 0.0)
    big = w.scaled(2.0)
    assert big.xmin == -8.0 and big.ymax == 4.0


def test_window_validation():
    with pytest.raises(ValueError):
        Window(1.0, 0.0, 0.0, 1.0, 4, 4)
    with pytest.raises(ValueError):
        Window(0.0, 1.0, 0.0, 1.0, 1, 4)


def test_polyline_validation():
    with pytest.raises(ValueError):
        Polyline(np.asarray([[0.0, 0.0]]), "test")
    with pytest.raises(ValueError):
        Polyline(np.asarray([[0.0, 0.0], [0.0, 0.0]]), "test")


def test_identity_has_no_critical_set(maps):
    win = Window(-2.0, 2.0, -2.0, 2.0, 50, 50)
    contours = critical_contours(maps["identity"], win)
    assert contours.is_empty()
    assert nearest_critical_distance((0.0, 0.0), contours) == np.inf


def test_fold_map_critical_line():
    # u = x^2, v = y has J = 2x: the critical set is the y-axis
    m = planar_map("x^2", "y", name="fold")
    win = Window(-1.0, 1.0, -1.0, 1.0, 101, 101)
    contours = critical_contours(m, win)
    assert not contours.is_empty()
    pts = np.vstack([p.points for p in contours.polylines])
    assert np.abs(pts[:, 0]).max() <= 2 * win.cell_width
    assert pts[:, 1].min() <= -0.9 and pts[:, 1].max() >= 0.9


def test_ex1_contours_track_analytic_curve(maps):
    # x = -y tan y on the branch |y| < pi/2 through the origin
    win = Window(-4.0, 4.0, -4.0, 4.0, 300, 300)
    contours = critical_contours(maps["ex1-nono"], win)
    assert not contours.is_empty()
    ys = np.linspace(-1.2, 1.2, 401)
    curve = np.column_stack([-ys * np.tan(ys), ys])
    d = contours.distance_to(curve)
    assert d.max() <= 2 * win.cell_diagonal


def test_contour_vertices_have_small_jacobian(maps):
    from planarmap.field import jacobian_grid
    win = Window(-4.0, 4.0, -4.0, 4.0, 300, 300)
    contours = critical_contours(maps["ex1-nono"], win)
    pts = np.vstack([p.points for p in contours.polylines])
    J = jacobian_grid(maps["ex1-nono"], pts[:, 0], pts[:, 1])
    xs, ys2 = np.meshgrid(win.xs, win.ys, indexing="ij")
    scale = np.nanmax(np.abs(jacobian_grid(maps["ex1-nono"], xs, ys2)))
    assert np.abs(J).max() <= 1e-6 * scale


def test_image_of_critical_collapse_to_cloud(maps):
    # every ex6 critical contour maps to a single point i*k*pi
    win = Window(-3.0, 3.0, -3.0, 3.0, 200, 200)
    contours = critical_contours(maps["ex6-imexp"], win)
    fs = image_of_critical(maps["ex6-imexp"], contours)
    assert fs.cloud.shape[0] > 0
    assert not fs.polylines
    k = np.round(fs.cloud[:, 1] / np.pi)
    gap = np.hypot(fs.cloud[:, 0], fs.cloud[:, 1] - k * np.pi)
    assert gap.max() <= 1e-2


def test_image_of_critical_keeps_curves():
    # u = x^2, v = y: the critical line x=0 maps to the segment u=0
    m = planar_map("x^2", "y", name="fold")
    win = Window(-1.0, 1.0, -1.0, 1.0, 101, 101)
    fs = image_of_critical(m, critical_contours(m, win))
    assert fs.polylines
    pts = np.vstack([p.points for p in fs.polylines])
    assert np.abs(pts[:, 0]).max() <= 1e-3
    assert pts[:, 1].max() - pts[:, 1].min() >= 1.5


def test_polyline_set_distance_and_merge():
    a = PolylineSet([Polyline(np.asarray([[0.0, 0.0], [1.0, 0.0]]), "a")])
    b = PolylineSet(cloud=np.asarray([[0.0, 2.0]]))
    d = a.distance_to(np.asarray([[0.5, 1.0]]))
    assert d[0] == pytest.approx(1.0)
    merged = a.merged_with(b)
    assert len(merged.polylines) == 1
    assert merged.cloud.shape[0] == 1
    d2 = merged.distance_to(np.asarray([[0.0, 1.5]]))
    assert d2[0] == pytest.approx(0.5)
    assert merged.total_vertices() == 3
