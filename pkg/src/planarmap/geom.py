"""Planar geometry primitives shared by the contour and path machinery.

Orientation tests use a scale-relative collinearity epsilon so the same
predicates remain meaningful from window scale down to the very small
scales reached by the staged path constructions.  Touching endpoints count
as intersections; path simplicity therefore demands that non-adjacent
segments are fully disjoint and adjacent segments meet only at their shared
vertex.
"""

from __future__ import annotations

import numpy as np

COLLINEAR_EPS = 1e-12

__all__ = [
    "COLLINEAR_EPS",
    "orient_sign",
    "segments_intersect",
    "segment_contact_point",
    "point_segment_distance",
    "points_to_segments_distance",
    "points_to_polyline_distance",
    "polyline_point_distance",
    "path_is_simple",
    "first_self_intersection",
    "path_diameter",
    "path_intersections_with",
    "dedupe_consecutive",
]


def _cross(ax, ay, bx, by) -> float:
    return ax * by - ay * bx


def orient_sign(a, b, c, eps: float = COLLINEAR_EPS) -> int:
    """Sign of the turn a->b->c; 0 when collinear up to a relative epsilon."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    acx, acy = c[0] - a[0], c[1] - a[1]
    cr = _cross(abx, aby, acx, acy)
    scale = np.hypot(abx, aby) * np.hypot(acx, acy)
    if abs(cr) <= eps * scale:
        return 0
    return 1 if cr > 0.0 else -1


def _within_box(p, a, b, eps_len: float) -> bool:
    return (
        min(a[0], b[0]) - eps_len <= p[0] <= max(a[0], b[0]) + eps_len
        and min(a[1], b[1]) - eps_len <= p[1] <= max(a[1], b[1]) + eps_len
    )


def _on_segment_collinear(p, a, b, eps: float) -> bool:
    """Assumes p is collinear with a-b; checks the parameter range."""
    eps_len = eps * (1.0 + np.hypot(b[0] - a[0], b[1] - a[1]))
    return _within_box(p, a, b, eps_len)


def segments_intersect(p1, p2, q1, q2, eps: float = COLLINEAR_EPS) -> bool:
    """Whether closed segments [p1,p2] and [q1,q2] share any point."""
    d1 = orient_sign(q1, q2, p1, eps)
    d2 = orient_sign(q1, q2, p2, eps)
    d3 = orient_sign(p1, p2, q1, eps)
    d4 = orient_sign(p1, p2, q2, eps)
    if d1 != d2 and d3 != d4 and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0:
        return True
    if d1 == 0 and _on_segment_collinear(p1, q1, q2, eps):
        return True
    if d2 == 0 and _on_segment_collinear(p2, q1, q2, eps):
        return True
    if d3 == 0 and _on_segment_collinear(q1, p1, p2, eps):
        return True
    if d4 == 0 and _on_segment_collinear(q2, p1, p2, eps):
        return True
    # non-proper crossing with mixed zero signs is covered above; remaining
    # mixed cases (one side zero, other strict) without on-segment contact
    # do not intersect
    if d1 != d2 and d3 != d4:
        # at least one endpoint sits exactly on the other segment's line but
        # outside its span; the strict-sign test above already failed
        return False
    return False


def segment_contact_point(p1, p2, q1, q2, eps: float = COLLINEAR_EPS):
    """A contact point of two intersecting segments, or None.

    For proper crossings this is the line intersection; for touches, the
    touching endpoint; for collinear overlaps, the overlap point closest to
    p1 along [p1,p2].
    """
    if not segments_intersect(p1, p2, q1, q2, eps):
        return None
    rx, ry = p2[0] - p1[0], p2[1] - p1[1]
    sx, sy = q2[0] - q1[0], q2[1] - q1[1]
    denom = _cross(rx, ry, sx, sy)
    scale = np.hypot(rx, ry) * np.hypot(sx, sy)
    if abs(denom) > eps * scale:
        t = _cross(q1[0] - p1[0], q1[1] - p1[1], sx, sy) / denom
        t = min(1.0, max(0.0, t))
        return (p1[0] + t * rx, p1[1] + t * ry)
    # collinear (or nearly): walk candidates along [p1,p2] and pick the
    # earliest point that lies on both segments
    candidates = []
    rr = rx * rx + ry * ry
    for c in (q1, q2, p1, p2):
        if _on_segment_collinear(c, p1, p2, eps) and _on_segment_collinear(c, q1, q2, eps):
            t = 0.0 if rr == 0.0 else ((c[0] - p1[0]) * rx + (c[1] - p1[1]) * ry) / rr
            candidates.append((t, (c[0], c[1])))
    if not candidates:
        return None
    candidates.sort(key=lambda item: item[0])
    return candidates[0][1]


# ---------------------------------------------------------------------------
# Distances


def point_segment_distance(p, a, b) -> float:
    return float(points_to_segments_distance(np.asarray([p], dtype=float),
                                             np.asarray([a], dtype=float),
                                             np.asarray([b], dtype=float))[0])


def points_to_segments_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Min distance from each point to the set of segments [a_k, b_k].

    ``points`` is (N,2); ``a`` and ``b`` are (M,2).  Returns (N,) distances.
    Chunked so memory stays modest for large N*M.
    """
    points = np.asarray(points, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = points.shape[0]
    if a.shape[0] == 0 or n == 0:
        return np.full(n, np.inf)
    out = np.full(n, np.inf)
    d = b - a  # (M,2)
    dd = np.einsum("ij,ij->i", d, d)  # (M,)
    dd_safe = np.where(dd == 0.0, 1.0, dd)
    chunk = max(1, int(4_000_000 // max(1, a.shape[0])))
    for start in range(0, n, chunk):
        p = points[start : start + chunk]  # (C,2)
        w = p[:, None, :] - a[None, :, :]  # (C,M,2)
        t = np.einsum("cmj,mj->cm", w, d) / dd_safe[None, :]
        t = np.clip(t, 0.0, 1.0)
        proj = a[None, :, :] + t[..., None] * d[None, :, :]
        diff = p[:, None, :] - proj
        dist = np.sqrt(np.einsum("cmj,cmj->cm", diff, diff))
        out[start : start + chunk] = dist.min(axis=1)
    return out


def points_to_polyline_distance(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Min distance from each point to a polyline given by its vertices."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[0] == 0:
        return np.full(np.asarray(points).shape[0], np.inf)
    if vertices.shape[0] == 1:
        p = np.asarray(points, dtype=float)
        return np.hypot(p[:, 0] - vertices[0, 0], p[:, 1] - vertices[0, 1])
    return points_to_segments_distance(points, vertices[:-1], vertices[1:])


def polyline_point_distance(vertices: np.ndarray, p) -> float:
    """Min distance from a single point to a polyline."""
    return float(points_to_polyline_distance(np.asarray([p], dtype=float), vertices)[0])


# ---------------------------------------------------------------------------
# Path predicates


def dedupe_consecutive(vertices: np.ndarray, eps: float = 0.0) -> np.ndarray:
    """Drop consecutive vertices closer than ``eps`` (exact dupes when 0)."""
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[0] == 0:
        return vertices
    keep = [0]
    for i in range(1, vertices.shape[0]):
        if np.hypot(*(vertices[i] - vertices[keep[-1]])) > eps:
            keep.append(i)
    return vertices[keep]


def _adjacent_ok(a, b, c, eps: float) -> bool:
    """Adjacent segments [a,b],[b,c] meet only at b (no fold-back overlap)."""
    if orient_sign(a, b, c, eps) != 0:
        return True
    # collinear: reject reversal (dot product of directions negative)
    dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
    return dot > 0.0


def _segment_boxes(v: np.ndarray, eps: float):
    lo = np.minimum(v[:-1], v[1:])
    hi = np.maximum(v[:-1], v[1:])
    span = np.hypot(hi[:, 0] - lo[:, 0], hi[:, 1] - lo[:, 1])
    pad = eps * (1.0 + span)
    return lo - pad[:, None], hi + pad[:, None]


def _box_overlap_pairs(lo_a, hi_a, lo_b, hi_b, min_j_offset: int | None = None):
    """Index pairs (i, j) of overlapping padded boxes, lexicographic order.

    With ``min_j_offset`` set, only pairs with j >= i + min_j_offset are kept
    (self-intersection case where both box lists describe the same path).
    """
    na, nb = lo_a.shape[0], lo_b.shape[0]
    pairs = []
    chunk = max(1, int(4_000_000 // max(1, nb)))
    for start in range(0, na, chunk):
        stop = min(na, start + chunk)
        ov = (
            (lo_a[start:stop, None, 0] <= hi_b[None, :, 0])
            & (lo_b[None, :, 0] <= hi_a[start:stop, None, 0])
            & (lo_a[start:stop, None, 1] <= hi_b[None, :, 1])
            & (lo_b[None, :, 1] <= hi_a[start:stop, None, 1])
        )
        if min_j_offset is not None:
            ii = np.arange(start, stop)[:, None]
            jj = np.arange(nb)[None, :]
            ov &= jj >= ii + min_j_offset
        idx = np.argwhere(ov)
        if idx.shape[0]:
            idx[:, 0] += start
            pairs.append(idx)
    if not pairs:
        return np.empty((0, 2), dtype=int)
    return np.vstack(pairs)


def first_self_intersection(vertices: np.ndarray, eps: float = COLLINEAR_EPS):
    """First offending pair for simplicity, scanning pairs in path order.

    Returns ``(i, j, kind)`` with ``kind`` in {"adjacent", "cross"} for the
    segment indices, or ``None`` when the path is simple.
    """
    v = np.asarray(vertices, dtype=float)
    n = v.shape[0] - 1  # number of segments
    if n < 1:
        return None
    # adjacent fold-backs, vectorized replica of _adjacent_ok
    offenders = []
    if n >= 2:
        ab = v[1:-1] - v[:-2]
        ac = v[2:] - v[:-2]
        bc = v[2:] - v[1:-1]
        cr = ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0]
        scale = np.hypot(ab[:, 0], ab[:, 1]) * np.hypot(ac[:, 0], ac[:, 1])
        collinear = np.abs(cr) <= eps * scale
        dot = ab[:, 0] * bc[:, 0] + ab[:, 1] * bc[:, 1]
        for i in np.nonzero(collinear & (dot <= 0.0))[0].tolist():
            offenders.append((i, i + 1, "adjacent"))
    lo, hi = _segment_boxes(v, eps)
    for i, j in _box_overlap_pairs(lo, hi, lo, hi, min_j_offset=2).tolist():
        offenders.append((i, j, "cross"))
    offenders.sort(key=lambda t: (t[0], t[1]))
    for i, j, kind in offenders:
        if kind == "adjacent":
            return (i, j, kind)
        if segments_intersect(v[i], v[i + 1], v[j], v[j + 1], eps):
            return (i, j, kind)
    return None


def path_is_simple(vertices: np.ndarray, eps: float = COLLINEAR_EPS) -> bool:
    """Exact simplicity: no repeated consecutive vertices, adjacent segments
    meeting only at their shared vertex, non-adjacent segments disjoint."""
    v = np.asarray(vertices, dtype=float)
    if v.shape[0] < 2:
        return False
    steps = np.hypot(np.diff(v[:, 0]), np.diff(v[:, 1]))
    if np.any(steps == 0.0):
        return False
    return first_self_intersection(v, eps) is None


def path_intersections_with(path_a: np.ndarray, path_b: np.ndarray, eps: float = COLLINEAR_EPS):
    """Contact points between two polylines as (seg_a, seg_b, point) triples."""
    a = np.asarray(path_a, dtype=float)
    b = np.asarray(path_b, dtype=float)
    if a.shape[0] < 2 or b.shape[0] < 2:
        return []
    lo_a, hi_a = _segment_boxes(a, eps)
    lo_b, hi_b = _segment_boxes(b, eps)
    hits = []
    for i, j in _box_overlap_pairs(lo_a, hi_a, lo_b, hi_b).tolist():
        if segments_intersect(a[i], a[i + 1], b[j], b[j + 1], eps):
            pt = segment_contact_point(a[i], a[i + 1], b[j], b[j + 1], eps)
            hits.append((i, j, pt))
    return hits


def path_diameter(vertices: np.ndarray) -> float:
    """Diameter of a polygonal path (attained at a vertex pair)."""
    v = np.asarray(vertices, dtype=float)
    n = v.shape[0]
    if n < 2:
        return 0.0
    best = 0.0
    chunk = max(1, int(4_000_000 // max(1, n)))
    for start in range(0, n, chunk):
        p = v[start : start + chunk]
        dx = p[:, None, 0] - v[None, :, 0]
        dy = p[:, None, 1] - v[None, :, 1]
        best = max(best, float(np.sqrt(dx * dx + dy * dy).max()))
    return best
