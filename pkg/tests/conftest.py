"""Shared fixtures and independent oracles for the test suite.

Oracles deliberately avoid the library's own code paths: derivatives are
checked against central finite differences, segment intersection against
exact rational arithmetic, and map values against hand-written formulas.
"""

from fractions import Fraction

import numpy as np
import pytest

from planarmap import builtin
from planarmap.field import evaluate_grid


@pytest.fixture(scope="session")
def maps():
    names = (
        "identity", "zsquared", "ex1-nono", "ex2-bloch", "ex3-zplusre",
        "ex4-cubic", "ex5-quadline", "ex6-imexp",
    )
    return {name: builtin(name) for name in names}


def fd_partials(map, x: float, y: float, h: float = 1e-6):
    """Central-difference partials (ux, uy, vx, vy) of a PlanarMap."""
    xs = np.asarray([x + h, x - h, x, x])
    ys = np.asarray([y, y, y + h, y - h])
    u, v = evaluate_grid(map, xs, ys)
    return (
        (u[0] - u[1]) / (2 * h),
        (u[2] - u[3]) / (2 * h),
        (v[0] - v[1]) / (2 * h),
        (v[2] - v[3]) / (2 * h),
    )


def _orient_exact(a, b, c) -> int:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    cx, cy = Fraction(c[0]), Fraction(c[1])
    cr = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (cr > 0) - (cr < 0)


def _on_segment_exact(p, a, b) -> bool:
    if _orient_exact(a, b, p) != 0:
        return False
    px, py = Fraction(p[0]), Fraction(p[1])
    lox, hix = sorted((Fraction(a[0]), Fraction(b[0])))
    loy, hiy = sorted((Fraction(a[1]), Fraction(b[1])))
    return lox <= px <= hix and loy <= py <= hiy


def exact_segments_intersect(p1, p2, q1, q2) -> bool:
    """Exact closed-segment intersection over the rationals."""
    d1 = _orient_exact(q1, q2, p1)
    d2 = _orient_exact(q1, q2, p2)
    d3 = _orient_exact(p1, p2, q1)
    d4 = _orient_exact(p1, p2, q2)
    if d1 != d2 and d3 != d4 and 0 not in (d1, d2, d3, d4):
        return True
    return (
        _on_segment_exact(p1, q1, q2)
        or _on_segment_exact(p2, q1, q2)
        or _on_segment_exact(q1, p1, p2)
        or _on_segment_exact(q2, p1, p2)
    )


def stack_polyline_set(ps) -> np.ndarray:
    """All vertices of a PolylineSet (polylines plus cloud) as one array."""
    parts = [p.points for p in ps.polylines]
    if ps.cloud.shape[0]:
        parts.append(ps.cloud)
    if not parts:
        return np.empty((0, 2))
    return np.vstack(parts)
