"""Critical-set extraction: zero contours of the jacobian on a window.

The jacobian is sampled on the window grid; cells whose corner signs differ
produce contour segments (marching squares).  Crossing positions start from
linear interpolation along the cell edge and are then driven down by a
bracketed bisection of the jacobian restricted to that edge, so every
emitted vertex satisfies ``|J| <= eps_j`` with
``eps_j = 1e-6 * max |J|`` over the grid.  Ambiguous (saddle) cells are
resolved by the jacobian sign at the cell center.  Contours are open
polylines; closed loops repeat their first vertex at the end.  Tangential
zeros that do not change sign across any edge are invisible at grid
resolution, a documented limitation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .field import PlanarMap, Point, evaluate_grid, jacobian_grid
from .geom import points_to_polyline_distance

__all__ = [
    "Window",
    "Polyline",
    "PolylineSet",
    "critical_contours",
    "image_of_critical",
    "nearest_critical_distance",
    "EPS_J_FACTOR",
]

EPS_J_FACTOR = 1e-6


@dataclass(frozen=True)
class Window:
    """An axis-aligned sampling window with grid counts."""

    xmin: float
    xmax: float
    ymin: float
    ymax: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("window must have positive extent")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid counts must be at least 2")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.xmin, self.xmax, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.ymin, self.ymax, self.ny)

    @property
    def cell_width(self) -> float:
        return (self.xmax - self.xmin) / (self.nx - 1)

    @property
    def cell_height(self) -> float:
        return (self.ymax - self.ymin) / (self.ny - 1)

    @property
    def cell_diagonal(self) -> float:
        return float(np.hypot(self.cell_width, self.cell_height))

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def scaled(self, factor: float) -> "Window":
        """The window grown about its center, grid counts preserved."""
        cx = 0.5 * (self.xmin + self.xmax)
        cy = 0.5 * (self.ymin + self.ymax)
        hw = 0.5 * (self.xmax - self.xmin) * factor
        hh = 0.5 * (self.ymax - self.ymin) * factor
        return Window(cx - hw, cx + hw, cy - hh, cy + hh, self.nx, self.ny)


@dataclass(frozen=True)
class Polyline:
    """An ordered vertex list with a provenance tag."""

    points: np.ndarray
    source: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("polyline needs at least 2 points of shape (n, 2)")
        steps = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
        if np.any(steps == 0.0):
            raise ValueError("polyline has repeated consecutive points")


@dataclass
class PolylineSet:
    """Polylines plus an optional point cloud (isolated estimates)."""

    polylines: list[Polyline] = dataclass_field(default_factory=list)
    cloud: np.ndarray = dataclass_field(default_factory=lambda: np.empty((0, 2)))
    cloud_source: str = "cluster-estimate"

    def __post_init__(self):
        self.cloud = np.asarray(self.cloud, dtype=float).reshape(-1, 2)

    def is_empty(self) -> bool:
        return not self.polylines and self.cloud.shape[0] == 0

    def total_vertices(self) -> int:
        return sum(p.points.shape[0] for p in self.polylines) + self.cloud.shape[0]

    def distance_to(self, points: np.ndarray) -> np.ndarray:
        """Min distance from each query point to the whole set (+inf if empty)."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        best = np.full(points.shape[0], np.inf)
        for pl in self.polylines:
            best = np.minimum(best, points_to_polyline_distance(points, pl.points))
        if self.cloud.shape[0]:
            chunk = max(1, int(4_000_000 // max(1, self.cloud.shape[0])))
            for start in range(0, points.shape[0], chunk):
                p = points[start : start + chunk]
                dx = p[:, None, 0] - self.cloud[None, :, 0]
                dy = p[:, None, 1] - self.cloud[None, :, 1]
                best[start : start + chunk] = np.minimum(
                    best[start : start + chunk], np.sqrt(dx * dx + dy * dy).min(axis=1)
                )
        return best

    def merged_with(self, other: "PolylineSet") -> "PolylineSet":
        cloud = np.vstack([self.cloud, other.cloud]) if other.cloud.shape[0] else self.cloud
        return PolylineSet(self.polylines + other.polylines, cloud, self.cloud_source)


# ---------------------------------------------------------------------------
# Marching squares with edge-wise bisection refinement

# a vertex on a cell edge is keyed by the lattice edge it sits on
_H, _V = 0, 1  # horizontal edge (between x-neighbors), vertical edge


def _refine_edges(map: PlanarMap, p0: np.ndarray, p1: np.ndarray, j0: np.ndarray, j1: np.ndarray,
                  iters: int = 52) -> np.ndarray:
    """Bisection for the jacobian zero on each bracketing edge (vectorized).

    ``p0``/``p1`` are (M,2) edge endpoints with jacobian values ``j0``/``j1``
    of opposite sign (or zero).  Returns (M,2) crossing points.
    """
    a = np.zeros(j0.shape[0])
    b = np.ones(j0.shape[0])
    ja = j0.copy()
    # initial linear interpolation provides the first probe
    for _ in range(iters):
        t = np.where(ja - j1 != 0.0, ja / np.where(ja == j1, 1.0, ja - j1), 0.5)
        # fall back to midpoint when interpolation leaves the bracket
        mid = 0.5 * (a + b)
        t = a + np.clip(t, 0.0, 1.0) * (b - a)
        bad = ~((t > a) & (t < b))
        t = np.where(bad, mid, t)
        pts = p0 + t[:, None] * (p1 - p0)
        jt = jacobian_grid(map, pts[:, 0], pts[:, 1])
        jt = np.where(np.isfinite(jt), jt, 0.0)
        same_side = (jt > 0) == (ja > 0)
        a = np.where(same_side, t, a)
        ja = np.where(same_side, jt, ja)
        b = np.where(same_side, b, t)
        j1 = np.where(same_side, j1, jt)
    t = 0.5 * (a + b)
    return p0 + t[:, None] * (p1 - p0)


# cell-corner bit layout: 1=(i,j) 2=(i+1,j) 4=(i+1,j+1) 8=(i,j+1)
# edges: 0 bottom, 1 right, 2 top, 3 left
_CASE_SEGMENTS: dict[int, list[tuple[int, int]]] = {
    0: [], 15: [],
    1: [(3, 0)], 14: [(3, 0)],
    2: [(0, 1)], 13: [(0, 1)],
    3: [(3, 1)], 12: [(3, 1)],
    4: [(1, 2)], 11: [(1, 2)],
    6: [(0, 2)], 9: [(0, 2)],
    7: [(3, 2)], 8: [(3, 2)],
    # 5 and 10 are the saddle cases, resolved at runtime
}


def critical_contours(map: PlanarMap, window: Window) -> PolylineSet:
    """Zero-level contours of the jacobian over ``window``.

    Non-finite jacobian samples mask out their cells.  Every returned vertex
    satisfies ``|J| <= 1e-6 * max |J|`` over the finite grid samples.
    """
    xs, ys = window.xs, window.ys
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    J = jacobian_grid(map, X, Y)
    finite = np.isfinite(J)
    jmax = float(np.abs(J[finite]).max()) if finite.any() else 0.0
    if jmax == 0.0:
        return PolylineSet([])
    pos = np.where(finite, J > 0.0, False)

    nx, ny = window.nx, window.ny
    # crossing edges: sign change with both endpoints finite
    h_cross = (pos[:-1, :] != pos[1:, :]) & finite[:-1, :] & finite[1:, :]  # (nx-1, ny)
    v_cross = (pos[:, :-1] != pos[:, 1:]) & finite[:, :-1] & finite[:, 1:]  # (nx, ny-1)

    vertex_of: dict[tuple[int, int, int], int] = {}
    ep0, ep1, ej0, ej1, keys = [], [], [], [], []
    for (kind, cross) in ((_H, h_cross), (_V, v_cross)):
        ii, jj = np.nonzero(cross)
        for i, j in zip(ii.tolist(), jj.tolist()):
            keys.append((kind, i, j))
            if kind == _H:
                ep0.append((xs[i], ys[j]))
                ep1.append((xs[i + 1], ys[j]))
                ej0.append(J[i, j])
                ej1.append(J[i + 1, j])
            else:
                ep0.append((xs[i], ys[j]))
                ep1.append((xs[i], ys[j + 1]))
                ej0.append(J[i, j])
                ej1.append(J[i, j + 1])
    if not keys:
        return PolylineSet([])
    pts = _refine_edges(map, np.asarray(ep0), np.asarray(ep1), np.asarray(ej0), np.asarray(ej1))
    for k, key in enumerate(keys):
        vertex_of[key] = k

    # assemble per-cell segments
    def cell_edge_key(i: int, j: int, edge: int) -> tuple[int, int, int]:
        if edge == 0:
            return (_H, i, j)
        if edge == 2:
            return (_H, i, j + 1)
        if edge == 3:
            return (_V, i, j)
        return (_V, i + 1, j)

    adj: dict[int, list[int]] = {}
    cell_mask = finite[:-1, :-1] & finite[1:, :-1] & finite[1:, 1:] & finite[:-1, 1:]
    ci, cj = np.nonzero(cell_mask)
    centers_needed = []
    cell_cases = []
    for i, j in zip(ci.tolist(), cj.tolist()):
        case = (
            (1 if pos[i, j] else 0)
            | (2 if pos[i + 1, j] else 0)
            | (4 if pos[i + 1, j + 1] else 0)
            | (8 if pos[i, j + 1] else 0)
        )
        if case in (0, 15):
            continue
        cell_cases.append((i, j, case))
        if case in (5, 10):
            centers_needed.append((i, j))
    center_pos: dict[tuple[int, int], bool] = {}
    if centers_needed:
        cx = np.asarray([0.5 * (xs[i] + xs[i + 1]) for i, _ in centers_needed])
        cy = np.asarray([0.5 * (ys[j] + ys[j + 1]) for _, j in centers_needed])
        jc = jacobian_grid(map, cx, cy)
        for (i, j), val in zip(centers_needed, jc.tolist()):
            center_pos[(i, j)] = bool(np.isfinite(val) and val > 0.0)

    for i, j, case in cell_cases:
        if case == 5:  # corners (i,j) and (i+1,j+1) positive
            segs = [(3, 0), (1, 2)] if center_pos[(i, j)] else [(3, 2), (0, 1)]
        elif case == 10:  # corners (i+1,j) and (i,j+1) positive
            segs = [(0, 1), (2, 3)] if center_pos[(i, j)] else [(3, 0), (1, 2)]
        else:
            segs = _CASE_SEGMENTS[case]
        for e0, e1 in segs:
            k0 = vertex_of.get(cell_edge_key(i, j, e0))
            k1 = vertex_of.get(cell_edge_key(i, j, e1))
            if k0 is None or k1 is None:
                continue
            adj.setdefault(k0, []).append(k1)
            adj.setdefault(k1, []).append(k0)

    polylines = _chain(adj, pts)
    return PolylineSet([Polyline(p, "critical-contour") for p in polylines])


def _chain(adj: dict[int, list[int]], pts: np.ndarray) -> list[np.ndarray]:
    """Walk the vertex adjacency into open chains, then remaining loops."""
    used_edges: set[tuple[int, int]] = set()
    chains: list[np.ndarray] = []

    def take(a: int, b: int) -> None:
        used_edges.add((a, b))
        used_edges.add((b, a))

    def walk(start: int) -> list[int]:
        chain = [start]
        cur = start
        while True:
            nxt = None
            for cand in adj.get(cur, []):
                if (cur, cand) not in used_edges:
                    nxt = cand
                    break
            if nxt is None:
                return chain
            take(cur, nxt)
            chain.append(nxt)
            cur = nxt

    endpoints = sorted(k for k, nbrs in adj.items() if len(nbrs) == 1)
    for start in endpoints:
        if all((start, nb) in used_edges for nb in adj[start]):
            continue
        chain = walk(start)
        if len(chain) >= 2:
            chains.append(pts[chain])
    # leftover loops
    for start in sorted(adj):
        if all((start, nb) in used_edges for nb in adj[start]):
            continue
        chain = walk(start)
        if len(chain) >= 2:
            closed = chain + [chain[0]] if chain[0] in adj.get(chain[-1], []) else chain
            chains.append(pts[closed])
    cleaned = []
    for c in chains:
        steps = np.hypot(np.diff(c[:, 0]), np.diff(c[:, 1]))
        keep = np.concatenate([[True], steps > 0.0])
        c = c[keep]
        if c.shape[0] >= 2:
            cleaned.append(c)
    return cleaned


def image_of_critical(
    map: PlanarMap, contours: PolylineSet, jump_threshold: float = 10.0,
    collapse_tol: float = 1e-6,
) -> PolylineSet:
    """Map contour polylines through f, splitting where images jump.

    A contour whose whole image concentrates at one point (f constant on
    the critical piece) becomes a cloud entry.  Otherwise the image is
    split at non-finite values and at consecutive-point jumps above
    ``jump_threshold``; single-vertex fragments left over from splitting
    are unresolved stretches rather than isolated image points and are
    dropped.
    """
    out: list[Polyline] = []
    dots: list[np.ndarray] = []
    for pl in contours.polylines:
        u, v = evaluate_grid(map, pl.points[:, 0], pl.points[:, 1])
        ok = np.isfinite(u) & np.isfinite(v)
        if not ok.any():
            continue
        fu, fv = u[ok], v[ok]
        extent = math.hypot(float(fu.max() - fu.min()), float(fv.max() - fv.min()))
        scale = max(1.0, float(np.abs(fu).max()), float(np.abs(fv).max()))
        if extent <= collapse_tol * scale:
            dots.append(np.array([np.median(fu), np.median(fv)]))
            continue
        img = np.column_stack([u, v])
        jumps = np.hypot(np.diff(u), np.diff(v))
        pieces: list[list[int]] = [[]]
        for k in range(img.shape[0]):
            if not ok[k]:
                pieces.append([])
                continue
            if pieces[-1] and jumps[k - 1] > jump_threshold:
                pieces.append([])
            pieces[-1].append(k)
        for piece in pieces:
            if len(piece) < 2:
                continue
            seg = img[piece]
            steps = np.hypot(np.diff(seg[:, 0]), np.diff(seg[:, 1]))
            seg = seg[np.concatenate([[True], steps > 0.0])]
            if seg.shape[0] >= 2:
                out.append(Polyline(seg, "image-of-critical"))
    cloud = np.asarray(dots, dtype=float).reshape(-1, 2)
    return PolylineSet(out, cloud=cloud, cloud_source="image-of-critical")


def nearest_critical_distance(z: Point, contours: PolylineSet) -> float:
    """Distance from ``z`` to the contour set; +inf when the set is empty."""
    if contours.is_empty():
        return float("inf")
    return float(contours.distance_to(np.asarray([z], dtype=float))[0])
