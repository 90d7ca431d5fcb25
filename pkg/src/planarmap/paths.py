"""Polygonal path machinery for image-plane constructions.

Four layers build on each other: loop erasure turns an arbitrary polygonal
path into a simple sub-path; a grid BFS connects two points inside a region
oracle under a diameter budget; a tube walk detours around an existing path
touching it only at its endpoint; and the staged end-cut construction
threads a convergent sequence onto a single simple path with an auditable
radius/diameter schedule.

All simplicity claims are verified with the exact segment predicates from
``geom``; region membership along segments is sampled at the oracle's probe
resolution and is honest only at that resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np

from . import geom
from .critical import Window

__all__ = [
    "PathError",
    "PolyPath",
    "RegionOracle",
    "region_from_window",
    "EndCutSchedule",
    "EndCutResult",
    "make_simple",
    "concat_paths",
    "polygonal_connect",
    "tube_detour",
    "end_cut",
    "ulac_probe",
]

_NODE_CAP = 1_200_000


class PathError(RuntimeError):
    """Path-construction failure with a stable reason slug."""

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


@dataclass(frozen=True)
class PolyPath:
    """An open polygonal path with at least two distinct-step vertices."""

    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", v)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValueError("path needs at least 2 vertices of shape (n, 2)")
        steps = np.hypot(np.diff(v[:, 0]), np.diff(v[:, 1]))
        if np.any(steps == 0.0):
            raise ValueError("path has repeated consecutive vertices")
        if self.closed:
            raise ValueError("closed paths are not supported")

    def __len__(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def first(self) -> np.ndarray:
        return self.vertices[0].copy()

    @property
    def last(self) -> np.ndarray:
        return self.vertices[-1].copy()

    def diameter(self) -> float:
        return geom.path_diameter(self.vertices)

    def length(self) -> float:
        return float(np.hypot(np.diff(self.vertices[:, 0]), np.diff(self.vertices[:, 1])).sum())

    def is_simple(self, eps: float = geom.COLLINEAR_EPS) -> bool:
        return geom.path_is_simple(self.vertices, eps)

    def reverse(self) -> "PolyPath":
        return PolyPath(self.vertices[::-1].copy())

    def refined(self, factor: int) -> "PolyPath":
        """Subdivide every segment into ``factor`` equal parts."""
        if factor < 1:
            raise ValueError("factor must be >= 1")
        if factor == 1:
            return self
        v = self.vertices
        pieces = [v[:1]]
        t = np.arange(1, factor + 1) / factor
        for k in range(v.shape[0] - 1):
            pieces.append(v[k] + t[:, None] * (v[k + 1] - v[k]))
        return PolyPath(np.vstack(pieces))


def concat_paths(a: PolyPath, b: PolyPath) -> PolyPath:
    """Join two paths sharing the junction vertex exactly."""
    if not np.array_equal(a.vertices[-1], b.vertices[0]):
        raise ValueError("paths do not share the junction vertex")
    return PolyPath(np.vstack([a.vertices, b.vertices[1:]]))


@dataclass(frozen=True)
class RegionOracle:
    """Open-set membership oracle with a bounding window and probe step.

    ``contains`` maps an (N, 2) float array to an (N,) boolean array and must
    be pure and deterministic.
    """

    contains: Callable[[np.ndarray], np.ndarray]
    window: Window
    h: float

    def __post_init__(self):
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValueError("probe resolution h must be positive and finite")

    def contains_points(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return np.asarray(self.contains(pts), dtype=bool).reshape(pts.shape[0])

    def contains_point(self, p) -> bool:
        return bool(self.contains_points(np.asarray([p], dtype=float))[0])

    def restricted_to_disk(self, center, radius: float) -> "RegionOracle":
        """Intersect with the closed disk B(center, radius)."""
        cx, cy = float(center[0]), float(center[1])
        if not (radius > 0.0):
            raise ValueError("radius must be positive")
        base = self.contains
        xmin = max(self.window.xmin, cx - radius)
        xmax = min(self.window.xmax, cx + radius)
        ymin = max(self.window.ymin, cy - radius)
        ymax = min(self.window.ymax, cy + radius)
        if not (xmin < xmax and ymin < ymax):
            raise PathError("empty-region", "disk restriction leaves no area in the window")

        def pred(pts: np.ndarray) -> np.ndarray:
            pts = np.asarray(pts, dtype=float).reshape(-1, 2)
            out = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= radius
            if out.any():
                out[out] = np.asarray(base(pts[out]), dtype=bool)
            return out

        w = Window(xmin, xmax, ymin, ymax, self.window.nx, self.window.ny)
        return RegionOracle(pred, w, self.h)


def region_from_window(window: Window, h: float) -> RegionOracle:
    """The full open rectangle of ``window`` as a region oracle."""

    def pred(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        return (
            (pts[:, 0] > window.xmin)
            & (pts[:, 0] < window.xmax)
            & (pts[:, 1] > window.ymin)
            & (pts[:, 1] < window.ymax)
        )

    return RegionOracle(pred, window, h)


def _segment_in_region(contains_points, a, b, h: float) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    gap = float(np.hypot(*(b - a)))
    n = int(min(4096, max(2, math.ceil(gap / max(h, 1e-300)) + 1)))
    t = np.linspace(0.0, 1.0, n)
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    return bool(contains_points(pts).all())


# ---------------------------------------------------------------------------
# Loop erasure (simplification)


def _weld(v: np.ndarray, eps: float) -> np.ndarray:
    """Drop consecutive near-duplicate vertices, keeping the endpoints."""
    n = v.shape[0]
    if n <= 1:
        return v.copy()
    tol = eps * (1.0 + float(np.abs(v).max()))
    keep = [0]
    for i in range(1, n):
        if np.hypot(v[i, 0] - v[keep[-1], 0], v[i, 1] - v[keep[-1], 1]) > tol:
            keep.append(i)
    out = v[keep].copy()
    if keep[-1] != n - 1 and out.shape[0] >= 2:
        out[-1] = v[-1]
    return out


def make_simple(p, eps: float = geom.COLLINEAR_EPS) -> PolyPath:
    """Loop erasure: a simple sub-path with the same endpoints.

    Every output segment is a sub-segment of an input segment, traversed in
    the input order; the first offending pair (adjacent fold-back or
    non-adjacent contact) is excised repeatedly until none remains.
    """
    v = np.asarray(p.vertices if isinstance(p, PolyPath) else p, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
        raise PathError("degenerate", "need at least 2 points")
    if np.array_equal(v[0], v[-1]):
        raise PathError("degenerate", "closed input: first vertex equals last")
    v = _weld(v, eps)
    if v.shape[0] < 2:
        raise PathError("degenerate", "path collapsed to a point")
    guard = v.shape[0] + 16
    while guard > 0:
        guard -= 1
        hit = geom.first_self_intersection(v, eps)
        if hit is None:
            return PolyPath(v)
        i, j, kind = hit
        if kind == "adjacent":
            v = np.delete(v, i + 1, axis=0)
        else:
            q = geom.segment_contact_point(v[i], v[i + 1], v[j], v[j + 1], eps)
            if q is None:
                raise PathError("simplify-failed", "contact vanished between tests")
            v = np.vstack([v[: i + 1], [q], v[j + 1 :]])
        v = _weld(v, eps)
        if v.shape[0] < 2:
            raise PathError("degenerate", "path collapsed during simplification")
    raise PathError("simplify-failed", "loop erasure did not terminate")


# ---------------------------------------------------------------------------
# Grid BFS connection

_DIRS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1))


def _segments_contact_any(p, q, a, b, eps: float) -> np.ndarray:
    """Conservative contact test of edges [p_k, q_k] against segments [a_m, b_m].

    Touches count as contacts; signs are snapped to zero at a relative
    epsilon, so the result may over-report marginal grazes (safe direction
    for use as a movement filter).
    """
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    E, M = p.shape[0], a.shape[0]
    out = np.zeros(E, dtype=bool)
    if E == 0 or M == 0:
        return out
    chunk = max(1, int(2_000_000 // M))

    def snapped_sign(cr, scale):
        s = np.sign(cr)
        s[np.abs(cr) <= eps * scale] = 0.0
        return s

    for s0 in range(0, E, chunk):
        pp = p[s0 : s0 + chunk][:, None, :]
        qq = q[s0 : s0 + chunk][:, None, :]
        aa = a[None, :, :]
        bb = b[None, :, :]
        r = qq - pp
        s = bb - aa
        rl = np.hypot(r[..., 0], r[..., 1])
        sl = np.hypot(s[..., 0], s[..., 1])
        pa = aa - pp
        pb = bb - pp
        ap = pp - aa
        aq = qq - aa
        d1 = snapped_sign(r[..., 0] * pa[..., 1] - r[..., 1] * pa[..., 0],
                          rl * np.hypot(pa[..., 0], pa[..., 1]))
        d2 = snapped_sign(r[..., 0] * pb[..., 1] - r[..., 1] * pb[..., 0],
                          rl * np.hypot(pb[..., 0], pb[..., 1]))
        d3 = snapped_sign(s[..., 0] * ap[..., 1] - s[..., 1] * ap[..., 0],
                          sl * np.hypot(ap[..., 0], ap[..., 1]))
        d4 = snapped_sign(s[..., 0] * aq[..., 1] - s[..., 1] * aq[..., 0],
                          sl * np.hypot(aq[..., 0], aq[..., 1]))
        cross = (d1 * d2 <= 0.0) & (d3 * d4 <= 0.0)
        pad = eps * (1.0 + np.maximum(rl, sl))
        boxes = (
            (np.minimum(pp[..., 0], qq[..., 0]) - pad <= np.maximum(aa[..., 0], bb[..., 0]))
            & (np.minimum(aa[..., 0], bb[..., 0]) - pad <= np.maximum(pp[..., 0], qq[..., 0]))
            & (np.minimum(pp[..., 1], qq[..., 1]) - pad <= np.maximum(aa[..., 1], bb[..., 1]))
            & (np.minimum(aa[..., 1], bb[..., 1]) - pad <= np.maximum(pp[..., 1], qq[..., 1]))
        )
        out[s0 : s0 + chunk] = (cross & boxes).any(axis=1)
    return out


class _GridGraph:
    """Axis-aligned node grid with 8-neighbor moves and wave BFS."""

    def __init__(self, xs: np.ndarray, ys: np.ndarray, free: np.ndarray):
        self.xs = xs
        self.ys = ys
        self.free = free
        self.moves: dict[tuple[int, int], np.ndarray] = {}

    @staticmethod
    def build(bbox, h: float, contains_points) -> "_GridGraph | None":
        x0, x1, y0, y1 = bbox
        if not (x0 <= x1 and y0 <= y1):
            return None
        ni = int(math.floor((x1 - x0) / h)) + 1
        nj = int(math.floor((y1 - y0) / h)) + 1
        if ni * nj > _NODE_CAP:
            factor = math.sqrt(ni * nj / _NODE_CAP)
            h = h * factor * 1.0001
            ni = int(math.floor((x1 - x0) / h)) + 1
            nj = int(math.floor((y1 - y0) / h)) + 1
        xs = x0 + np.arange(ni) * h
        ys = y0 + np.arange(nj) * h
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        free = contains_points(pts).reshape(ni, nj)
        if not free.any():
            return None
        return _GridGraph(xs, ys, free)

    def node_xy(self, i: int, j: int) -> np.ndarray:
        return np.asarray([self.xs[i], self.ys[j]])

    def build_moves(self, barrier: np.ndarray | None = None, eps: float = geom.COLLINEAR_EPS,
                    barrier_dist: np.ndarray | None = None) -> None:
        """Per-direction movement masks with anti-corner-cut diagonals.

        With a ``barrier`` polyline, edges that may contact it are tested
        exactly (on the suspect set where both endpoint distances are small)
        and blocked on contact.
        """
        free = self.free
        ni, nj = free.shape
        h = float(self.xs[1] - self.xs[0]) if ni > 1 else float(self.ys[1] - self.ys[0])
        for di, dj in _DIRS:
            allowed = np.zeros_like(free)
            src = (slice(max(0, -di), ni - max(0, di)), slice(max(0, -dj), nj - max(0, dj)))
            dst = (slice(max(0, di), ni - max(0, -di)), slice(max(0, dj), nj - max(0, -dj)))
            allowed[src] = free[src] & free[dst]
            if di != 0 and dj != 0:
                ortho1 = (slice(max(0, di), ni - max(0, -di)), slice(max(0, -dj), nj - max(0, dj)))
                ortho2 = (slice(max(0, -di), ni - max(0, di)), slice(max(0, dj), nj - max(0, -dj)))
                allowed[src] &= free[ortho1] & free[ortho2]
            if barrier is not None and barrier_dist is not None:
                edge_len = h * math.hypot(di, dj)
                suspect = np.zeros_like(free)
                suspect[src] = (barrier_dist[src] <= edge_len) & (barrier_dist[dst] <= edge_len)
                idx = np.argwhere(allowed & suspect)
                if idx.shape[0]:
                    P = np.column_stack([self.xs[idx[:, 0]], self.ys[idx[:, 1]]])
                    Q = np.column_stack([self.xs[idx[:, 0] + di], self.ys[idx[:, 1] + dj]])
                    bad = _segments_contact_any(P, Q, barrier[:-1], barrier[1:], eps)
                    allowed[idx[bad, 0], idx[bad, 1]] = False
            self.moves[(di, dj)] = allowed

    def bfs(self, start: tuple[int, int]) -> np.ndarray:
        """Wave BFS from ``start``; returns parent-direction indices (-1 unvisited)."""
        ni, nj = self.free.shape
        parent = np.full((ni, nj), -1, dtype=np.int8)
        parent[start] = 8  # sentinel: root
        frontier = np.zeros((ni, nj), dtype=bool)
        frontier[start] = True
        while frontier.any():
            nxt = np.zeros((ni, nj), dtype=bool)
            for d_idx, (di, dj) in enumerate(_DIRS):
                mv = self.moves[(di, dj)]
                step = frontier & mv
                if not step.any():
                    continue
                src_idx = np.argwhere(step)
                ti = src_idx[:, 0] + di
                tj = src_idx[:, 1] + dj
                new = parent[ti, tj] == -1
                if new.any():
                    parent[ti[new], tj[new]] = d_idx
                    nxt[ti[new], tj[new]] = True
            frontier = nxt
        return parent

    def walk_back(self, parent: np.ndarray, goal: tuple[int, int]) -> list[tuple[int, int]]:
        path = [goal]
        cur = goal
        while parent[cur] != 8:
            d_idx = int(parent[cur])
            if d_idx < 0:
                raise PathError("no-path-found", "goal not reached")
            di, dj = _DIRS[d_idx]
            cur = (cur[0] - di, cur[1] - dj)
            path.append(cur)
        path.reverse()
        return path


def _attach_node(grid: _GridGraph, p: np.ndarray, contains_points, h: float,
                 extra_ok=None, max_tries: int = 64):
    """Nearest free node reachable from p by an in-region straight segment."""
    free_idx = np.argwhere(grid.free)
    if free_idx.shape[0] == 0:
        return None
    nx = grid.xs[free_idx[:, 0]]
    ny = grid.ys[free_idx[:, 1]]
    dist = np.hypot(nx - p[0], ny - p[1])
    order = np.lexsort((free_idx[:, 1], free_idx[:, 0], dist))
    for k in order[:max_tries]:
        i, j = int(free_idx[k, 0]), int(free_idx[k, 1])
        node = grid.node_xy(i, j)
        if np.array_equal(node, p) or _segment_in_region(contains_points, p, node, h):
            if extra_ok is None or extra_ok(p, node):
                return (i, j)
    return None


def _shortcut(p: PolyPath, region: RegionOracle, h: float, eps: float) -> PolyPath:
    """Greedy chord replacement; vertices stay a subset, diameter never grows."""
    v = p.vertices
    n = v.shape[0]
    keep = [0]
    i = 0
    while i < n - 1:
        nxt = i + 1
        for j in range(n - 1, i + 1, -1):
            if _segment_in_region(region.contains_points, v[i], v[j], h):
                nxt = j
                break
        keep.append(nxt)
        i = nxt
    vv = v[keep]
    if vv.shape[0] < 2:
        return p
    return make_simple(vv, eps)


def polygonal_connect(a, b, region: RegionOracle, diameter_budget: float,
                      h: float | None = None, eps: float = geom.COLLINEAR_EPS) -> PolyPath:
    """Simple polygonal path from a to b inside ``region``.

    A direct segment is tried first; otherwise a grid BFS restricted to
    ``region`` intersected with the disk B((a+b)/2, budget/2) guarantees the
    diameter bound.  Guaranteed to succeed (at sufficient resolution) when
    |a - b| <= budget/2 and the region is locally well connected at that
    scale; |a - b| <= budget is accepted opportunistically.
    """
    a = np.asarray(a, dtype=float).reshape(2)
    b = np.asarray(b, dtype=float).reshape(2)
    if not (diameter_budget > 0.0):
        raise ValueError("diameter budget must be positive")
    gap = float(np.hypot(*(b - a)))
    if gap == 0.0:
        raise PathError("degenerate", "endpoints coincide")
    if gap > diameter_budget:
        raise PathError("budget-infeasible", "endpoint separation exceeds the diameter budget")
    if not (region.contains_point(a) and region.contains_point(b)):
        raise PathError("endpoint-outside-region")
    h_eff = min(h if h is not None else region.h, diameter_budget / 16.0)
    if _segment_in_region(region.contains_points, a, b, h_eff):
        return PolyPath(np.asarray([a, b]))
    mid = 0.5 * (a + b)
    r = diameter_budget / 2.0

    def pred(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.hypot(pts[:, 0] - mid[0], pts[:, 1] - mid[1]) <= r
        if out.any():
            out[out] = region.contains_points(pts[out])
        return out

    bbox = (
        max(region.window.xmin, mid[0] - r),
        min(region.window.xmax, mid[0] + r),
        max(region.window.ymin, mid[1] - r),
        min(region.window.ymax, mid[1] + r),
    )
    grid = _GridGraph.build(bbox, h_eff, pred)
    if grid is None:
        raise PathError("no-path-found", "no free grid nodes in the budget disk")
    grid.build_moves()
    start = _attach_node(grid, a, pred, h_eff)
    goal = _attach_node(grid, b, pred, h_eff)
    if start is None or goal is None:
        raise PathError("no-path-found", "endpoints could not be attached to the grid")
    parent = grid.bfs(start)
    if parent[goal] == -1:
        raise PathError("no-path-found", "grid search exhausted without reaching the target")
    nodes = grid.walk_back(parent, goal)
    verts = [a] + [grid.node_xy(i, j) for i, j in nodes] + [b]
    path = make_simple(np.asarray(verts), eps)
    path = _shortcut(path, RegionOracle(pred, region.window, h_eff), h_eff, eps)
    if path.diameter() > diameter_budget * (1.0 + 1e-12):
        raise PathError("budget-exceeded", "internal error: disk restriction violated")
    return path


# ---------------------------------------------------------------------------
# Tube detour


def tube_detour(gamma: PolyPath, zeta, delta0: float, region: RegionOracle,
                h: float | None = None, eps: float = geom.COLLINEAR_EPS) -> PolyPath:
    """Path from ``zeta`` to gamma's endpoint meeting gamma only there.

    Walks a tube of radius between d(zeta, gamma) and delta0 around gamma;
    the result is simple, touches gamma exactly at its last vertex, and has
    diameter strictly below diameter(gamma) + 2*delta0.
    """
    g = gamma.vertices
    zeta = np.asarray(zeta, dtype=float).reshape(2)
    if not (delta0 > 0.0):
        raise ValueError("delta0 must be positive")
    scale = 1.0 + float(np.abs(g).max())
    dz = geom.polyline_point_distance(g, zeta)
    if dz <= eps * scale:
        raise PathError("zeta-on-gamma", "zeta lies on gamma")
    if dz >= delta0:
        raise PathError("zeta-too-far", "zeta is not within delta0 of gamma")
    if not region.contains_point(zeta):
        raise PathError("endpoint-outside-region")
    b = g[-1]
    delta = 0.5 * (dz + delta0)
    h_t = min(h if h is not None else region.h, delta / 6.0)

    gdist_cache: dict[int, np.ndarray] = {}

    def pred(pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        d = geom.points_to_polyline_distance(pts, g)
        out = (d > 0.0) & (d < delta)
        if out.any():
            out[out] = region.contains_points(pts[out])
        return out

    bbox = (
        max(region.window.xmin, float(g[:, 0].min()) - delta),
        min(region.window.xmax, float(g[:, 0].max()) + delta),
        max(region.window.ymin, float(g[:, 1].min()) - delta),
        min(region.window.ymax, float(g[:, 1].max()) + delta),
    )
    grid = _GridGraph.build(bbox, h_t, pred)
    if grid is None:
        raise PathError("tube-construction-failed", "no free nodes in the tube")
    X, Y = np.meshgrid(grid.xs, grid.ys, indexing="ij")
    D = geom.points_to_polyline_distance(
        np.column_stack([X.ravel(), Y.ravel()]), g
    ).reshape(grid.free.shape)
    grid.build_moves(barrier=g, eps=eps, barrier_dist=D)
    start = _attach_node(grid, zeta, pred, h_t)
    if start is None:
        raise PathError("tube-construction-failed", "zeta could not be attached to the tube")
    parent = grid.bfs(start)

    free_idx = np.argwhere(grid.free & (parent >= 0))
    if free_idx.shape[0] == 0:
        raise PathError("tube-construction-failed", "tube walk found no reachable nodes")
    bx = grid.xs[free_idx[:, 0]]
    by = grid.ys[free_idx[:, 1]]
    db = np.hypot(bx - b[0], by - b[1])
    near = db <= delta
    if not near.any():
        raise PathError("tube-construction-failed", "no reachable node near gamma's endpoint")
    cand = free_idx[near]
    order = np.lexsort((cand[:, 1], cand[:, 0], db[near]))
    for k in order[:64].tolist():
        i, j = int(cand[k, 0]), int(cand[k, 1])
        xi = grid.node_xy(i, j)
        hits = geom.path_intersections_with(np.asarray([xi, b]), g, eps)
        if any(np.hypot(pt[0] - b[0], pt[1] - b[1]) > eps * scale for _, _, pt in hits):
            continue
        if not _segment_in_region(region.contains_points, xi, b, h_t):
            continue
        nodes = grid.walk_back(parent, (i, j))
        verts = [zeta] + [grid.node_xy(ii, jj) for ii, jj in nodes] + [b]
        path = make_simple(np.asarray(verts), eps)
        hits = geom.path_intersections_with(path.vertices, g, eps)
        if any(np.hypot(pt[0] - b[0], pt[1] - b[1]) > eps * scale for _, _, pt in hits):
            continue
        if path.diameter() >= gamma.diameter() + 2.0 * delta0:
            continue
        return path
    raise PathError("tube-construction-failed", "no tube exit segment reached gamma's endpoint cleanly")


# ---------------------------------------------------------------------------
# End-cut construction


@dataclass
class EndCutSchedule:
    """Audit record of the staged construction.

    ``rho[k]`` is the distance of the partial path after stage k+1 to the
    limit point (rho[0] is the opening radius eps0); ``d[k]`` is the stage
    diameter bound d_{k+2} = min(eps0 / 2^(k+2), rho[k] / 4).
    """

    eps0: float
    delta0: float
    rho: list[float] = dataclass_field(default_factory=list)
    d: list[float] = dataclass_field(default_factory=list)

    def law_violations(self) -> list[str]:
        out = []
        for k, dk in enumerate(self.d):
            want = min(self.eps0 / 2.0 ** (k + 2), self.rho[k] / 4.0) if k < len(self.rho) else None
            if want is None:
                out.append(f"d[{k}] has no matching rho")
            elif dk != want:
                out.append(f"d[{k}] = {dk!r} != min(eps0/2^{k + 2}, rho[{k}]/4) = {want!r}")
        for k in range(1, len(self.rho)):
            if not (0.0 < self.rho[k] <= self.rho[k - 1]):
                out.append(f"rho[{k}] not positive-decreasing")
        return out


@dataclass
class EndCutResult:
    path: PolyPath | None
    schedule: EndCutSchedule
    kept_indices: list[int]
    segments: list[PolyPath]
    status: str
    diagnostic: str
    w0: np.ndarray


def _first_contact_along(eta: PolyPath, other: np.ndarray, w_end: np.ndarray, eps: float,
                         scale: float):
    """Earliest contact of eta with ``other`` excluding the terminal point."""
    best = None
    for i, _, pt in geom.path_intersections_with(eta.vertices, other, eps):
        if np.hypot(pt[0] - w_end[0], pt[1] - w_end[1]) <= eps * scale:
            continue
        seg = eta.vertices[i + 1] - eta.vertices[i]
        denom = float(seg @ seg)
        t = 0.0 if denom == 0.0 else float((np.asarray(pt) - eta.vertices[i]) @ seg) / denom
        key = (i, max(0.0, min(1.0, t)))
        if best is None or key < best[0]:
            best = (key, np.asarray(pt, dtype=float))
    return best


def _pick_zeta_before(eta: PolyPath, c_seg: int, c_t: float, c_pt: np.ndarray,
                      barrier: np.ndarray, delta0: float, step: float):
    """Walk backward from the contact point; first sample with distance in (0, delta0)."""
    v = eta.vertices

    def samples():
        # partial segment from the contact back to its start vertex
        seg = v[c_seg + 1] - v[c_seg]
        seg_len = float(np.hypot(*seg)) * c_t  # distance from the contact back to v[c_seg]
        if seg_len > 0.0:
            direction = (v[c_seg] - c_pt) / seg_len
            k = 1
            while k * step < seg_len:
                yield c_pt + (k * step) * direction
                k += 1
        for idx in range(c_seg, -1, -1):
            yield v[idx]
            if idx > 0:
                back = v[idx - 1] - v[idx]
                blen = float(np.hypot(*back))
                k = 1
                while k * step < blen:
                    yield v[idx] + (k * step / blen) * back
                    k += 1

    for p in samples():
        d = geom.polyline_point_distance(barrier, p)
        if 0.0 < d < delta0:
            return np.asarray(p, dtype=float)
    return None


def end_cut(seq, zeta0, region: RegionOracle, eps0: float, max_stages: int = 12,
            h: float | None = None, eps: float = geom.COLLINEAR_EPS) -> EndCutResult:
    """Thread a convergent sequence onto a simple path approaching its limit.

    Stage n connects the current endpoint to a deeper sequence point under
    the diameter bound d_n, keeps the new piece inside
    B(zeta0, (7/8) * rho_{n-1}), and repairs contacts with the previous
    piece by a tube detour.  Runs for ``max_stages`` stages or until no
    admissible candidate remains (a stall returns the partial path with a
    diagnostic instead of raising).
    """
    pts = np.asarray(seq, dtype=float).reshape(-1, 2)
    w0 = np.asarray(zeta0, dtype=float).reshape(2)
    if not (eps0 > 0.0):
        raise ValueError("eps0 must be positive")
    dists = np.hypot(pts[:, 0] - w0[0], pts[:, 1] - w0[1])
    schedule = EndCutSchedule(eps0=eps0, delta0=eps0 / 4.0, rho=[eps0], d=[])
    opening = np.nonzero((dists > 0.0) & (dists <= eps0 / 8.0))[0]
    if pts.shape[0] < 2 or opening.shape[0] == 0:
        raise PathError(
            "sequence-not-converging",
            "no sequence point within eps0/8 of the declared limit",
        )
    base_h = h if h is not None else region.h
    i1 = int(opening[0])
    kept = [i1]
    w_pts = [pts[i1]]
    gamma_full: np.ndarray | None = None
    prev_seg: PolyPath | None = None
    segments: list[PolyPath] = []
    status = "stalled"
    diagnostic = ""
    scale = 1.0 + float(np.abs(w0).max()) + float(np.abs(pts).max())

    for n in range(1, max_stages + 1):
        rho_n = schedule.rho[-1]
        d_next = min(eps0 / 2.0 ** (n + 1), rho_n / 4.0)
        schedule.d.append(d_next)
        budget = eps0 / 2.0 if n == 1 else schedule.d[-2]
        ball_r = eps0 if n == 1 else 0.875 * schedule.rho[-2]
        try:
            reg_n = region.restricted_to_disk(w0, ball_r)
        except PathError:
            diagnostic = f"stage {n}: containment ball leaves the window"
            break
        cand = np.nonzero((dists > 0.0) & (dists <= d_next / 4.0))[0]
        cand = cand[cand > kept[-1]]
        if cand.shape[0] == 0:
            diagnostic = (
                f"stage {n}: no sequence point beyond index {kept[-1]} "
                f"within d_next/4 = {d_next / 4.0:.3e} of the limit"
            )
            break
        new_seg: PolyPath | None = None
        picked = -1
        for j in cand.tolist():
            try:
                eta = polygonal_connect(pts[j], w_pts[-1], reg_n, budget, h=base_h, eps=eps)
            except PathError:
                continue
            if gamma_full is None:
                new_seg = eta
                picked = j
                break
            contact = _first_contact_along(eta, gamma_full, w_pts[-1], eps, scale)
            if contact is None:
                new_seg = eta
                picked = j
                break
            # the only repairable contacts are with the previous piece
            prev_contact = _first_contact_along(eta, prev_seg.vertices, w_pts[-1], eps, scale)
            if prev_contact is None:
                continue
            (c_seg, c_t), c_pt = prev_contact
            delta_rep = d_next / 2.0
            zeta = _pick_zeta_before(
                eta, c_seg, c_t, c_pt, prev_seg.vertices, delta_rep,
                step=min(base_h, delta_rep / 4.0),
            )
            if zeta is None:
                continue
            try:
                tube = tube_detour(prev_seg, zeta, delta_rep, reg_n, h=base_h, eps=eps)
            except PathError:
                continue
            if np.array_equal(zeta, eta.vertices[0]):
                combined = tube.vertices
            else:
                prefix = np.vstack([eta.vertices[: c_seg + 1], [zeta]])
                prefix = _weld(prefix, eps)
                combined = np.vstack([prefix, tube.vertices[1:]]) if prefix.shape[0] > 1 else tube.vertices
            try:
                candidate = make_simple(combined, eps)
            except PathError:
                continue
            if _first_contact_along(candidate, gamma_full, w_pts[-1], eps, scale) is not None:
                continue
            new_seg = candidate
            picked = j
            break
        if new_seg is None:
            diagnostic = f"stage {n}: no admissible connection to any candidate point"
            break
        seg = new_seg.reverse()  # orient w_n -> w_{n+1}
        seg_d = np.hypot(seg.vertices[:, 0] - w0[0], seg.vertices[:, 1] - w0[1])
        if n >= 2 and float(seg_d.max()) > ball_r * (1.0 + 1e-12):
            diagnostic = f"stage {n}: containment violated"
            break
        gamma_new = seg.vertices if gamma_full is None else np.vstack([gamma_full, seg.vertices[1:]])
        if not geom.path_is_simple(gamma_new, eps):
            diagnostic = f"stage {n}: assembled path lost simplicity"
            break
        gamma_full = gamma_new
        prev_seg = seg
        segments.append(seg)
        kept.append(int(picked))
        w_pts.append(pts[int(picked)])
        schedule.rho.append(float(geom.polyline_point_distance(gamma_full, w0)))
    else:
        status = "complete"
    if status != "complete":
        # the d entry for the failed stage stays in the schedule for audit
        pass
    path = PolyPath(gamma_full) if gamma_full is not None else None
    return EndCutResult(
        path=path,
        schedule=schedule,
        kept_indices=kept if path is not None else kept[:1],
        segments=segments,
        status=status,
        diagnostic=diagnostic,
        w0=w0,
    )


def ulac_probe(region: RegionOracle, delta: float, eps_budget: float, trials: int = 24,
               seed: int = 0, h: float | None = None) -> float:
    """Heuristic connectivity score: fraction of nearby pairs connectable.

    Samples point pairs at distance below ``delta`` inside the region and
    attempts budget-bounded connections; returns the success fraction
    (vacuously 1.0 when no pair could be sampled).  A score, not a proof.
    """
    rng = np.random.default_rng(seed)
    w = region.window
    wins = 0
    attempts = 0
    for _ in range(trials * 8):
        if attempts >= trials:
            break
        p = np.asarray([
            rng.uniform(w.xmin, w.xmax),
            rng.uniform(w.ymin, w.ymax),
        ])
        if not region.contains_point(p):
            continue
        ang = rng.uniform(0.0, 2.0 * math.pi)
        q = p + rng.uniform(0.0, delta) * np.asarray([math.cos(ang), math.sin(ang)])
        if float(np.hypot(*(q - p))) == 0.0 or not region.contains_point(q):
            continue
        attempts += 1
        try:
            polygonal_connect(p, q, region, eps_budget, h=h)
            wins += 1
        except PathError:
            continue
    return 1.0 if attempts == 0 else wins / attempts
