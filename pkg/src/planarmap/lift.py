"""Preimage enumeration and covering-style path lifting.

Preimages are found by damped Newton iteration on the real 2x2 Jacobian
started from a deterministic seed grid plus one seeded jitter pass; results
are window-limited by construction and flagged as such.  Path lifting runs
predictor-corrector continuation with adaptive sub-stepping; the corrector
converges two orders tighter than the reported tolerance so refining the
image path moves completed lifts only marginally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .critical import Window
from .field import PlanarMap, Point, evaluate_grid, wirtinger_grid
from .paths import PolyPath

__all__ = [
    "PreimageSearch",
    "LiftResult",
    "newton_refine_batch",
    "preimage_search",
    "preimages",
    "lift_path",
    "lift_all",
]

CORRECTOR_DIVISOR = 100.0


def newton_refine_batch(map: PlanarMap, x: np.ndarray, y: np.ndarray, wx, wy,
                        tol: float, max_iter: int = 50, step_cap: float = np.inf):
    """Newton iteration toward f(z) = (wx, wy) for every seed simultaneously.

    ``wx``/``wy`` broadcast against the seed arrays.  Returns refined
    ``(x, y, residual)``; non-converged seeds keep a residual above tol (or
    non-finite).  Pure and deterministic.
    """
    x = np.asarray(x, dtype=float).copy()
    y = np.asarray(y, dtype=float).copy()
    wx = np.broadcast_to(np.asarray(wx, dtype=float), x.shape)
    wy = np.broadcast_to(np.asarray(wy, dtype=float), x.shape)
    res = np.full(x.shape, np.inf)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            u, v, ux, uy, vx, vy = wirtinger_grid(map, x, y)
            rx = u - wx
            ry = v - wy
            res = np.hypot(rx, ry)
            det = ux * vy - uy * vx
            finite = (
                np.isfinite(res) & np.isfinite(det)
                & np.isfinite(ux) & np.isfinite(uy)
                & np.isfinite(vx) & np.isfinite(vy)
            )
            active = finite & (det != 0.0) & (res > tol)
            if not active.any():
                break
            dx = np.where(active, (vy * rx - uy * ry) / det, 0.0)
            dy = np.where(active, (-vx * rx + ux * ry) / det, 0.0)
            if np.isfinite(step_cap):
                dx = np.clip(dx, -step_cap, step_cap)
                dy = np.clip(dy, -step_cap, step_cap)
            x = x - dx
            y = y - dy
        u, v = evaluate_grid(map, x, y)
        res = np.hypot(u - wx, v - wy)
    return x, y, res


@dataclass(frozen=True)
class PreimageSearch:
    """Window-limited preimage enumeration result."""

    points: list[Point]
    w: Point
    window: Window
    tol: float
    seeds: int
    seed: int
    window_limited: bool = True


def preimage_search(map: PlanarMap, w, window: Window, tol: float,
                    seeds: int = 64, seed: int = 0) -> PreimageSearch:
    """Distinct solutions of f(z) = w inside ``window`` (window-limited).

    Newton from a ``seeds`` x ``seeds`` grid, then one jitter pass with a
    seeded generator; converged points are kept when inside the window,
    deduplicated at radius max(10*tol, 3*sqrt(tol)), and reported in
    lexicographic order.  The sqrt(tol) floor merges the halo a multiple
    root leaves behind (Newton stops on the image residual, which only
    pins z to about sqrt(tol) there); roots closer together than that are
    reported as one.
    """
    if not (tol > 0.0):
        raise ValueError("tol must be positive")
    wx, wy = float(w[0]), float(w[1])
    xs = np.linspace(window.xmin, window.xmax, seeds)
    ys = np.linspace(window.ymin, window.ymax, seeds)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    span = max(window.xmax - window.xmin, window.ymax - window.ymin)
    cap = 4.0 * span
    found_x, found_y = [], []
    rng = np.random.default_rng(seed)
    for jitter in (False, True):
        sx = X.ravel().copy()
        sy = Y.ravel().copy()
        if jitter:
            seed_dx = (window.xmax - window.xmin) / max(seeds - 1, 1)
            seed_dy = (window.ymax - window.ymin) / max(seeds - 1, 1)
            sx = sx + rng.uniform(-0.45, 0.45, sx.shape) * seed_dx
            sy = sy + rng.uniform(-0.45, 0.45, sy.shape) * seed_dy
        rx, ry, res = newton_refine_batch(map, sx, sy, wx, wy, tol, step_cap=cap)
        ok = (
            (res <= tol)
            & (rx >= window.xmin) & (rx <= window.xmax)
            & (ry >= window.ymin) & (ry <= window.ymax)
        )
        found_x.append(rx[ok])
        found_y.append(ry[ok])
    fx = np.concatenate(found_x)
    fy = np.concatenate(found_y)
    pts: list[Point] = []
    if fx.shape[0]:
        order = np.lexsort((fy, fx))
        fx, fy = fx[order], fy[order]
        ax = np.empty(0)
        ay = np.empty(0)
        radius = max(10.0 * tol, 3.0 * math.sqrt(tol))
        for k in range(fx.shape[0]):
            if ax.shape[0] and float(np.hypot(ax - fx[k], ay - fy[k]).min()) <= radius:
                continue
            ax = np.append(ax, fx[k])
            ay = np.append(ay, fy[k])
            pts.append(Point(float(fx[k]), float(fy[k])))
    return PreimageSearch(points=pts, w=Point(wx, wy), window=window, tol=tol,
                          seeds=seeds, seed=seed)


def preimages(map: PlanarMap, w, window: Window, tol: float,
              seeds: int = 64, seed: int = 0) -> list[Point]:
    return preimage_search(map, w, window, tol, seeds=seeds, seed=seed).points


# ---------------------------------------------------------------------------
# Continuation


@dataclass
class LiftResult:
    """A lift attempt: z-plane path vertex-matched to sampled image targets."""

    lifted: PolyPath | None
    status: str  # complete | hit-critical | left-window | newton-diverged
    max_residual: float
    image_targets: np.ndarray
    gamma_vertex_rows: list[int]
    min_separation_from_others: float | None = None

    @property
    def start(self) -> np.ndarray | None:
        return None if self.lifted is None else self.lifted.first

    @property
    def end(self) -> np.ndarray | None:
        return None if self.lifted is None else self.lifted.last


def _wirtinger_scalar(map: PlanarMap, x: float, y: float):
    u, v, ux, uy, vx, vy = wirtinger_grid(
        map, np.asarray([x]), np.asarray([y])
    )
    return (float(u[0]), float(v[0]), float(ux[0]), float(uy[0]),
            float(vx[0]), float(vy[0]))


def lift_path(map: PlanarMap, gamma: PolyPath, z0, tol: float,
              window: Window | None = None, max_newton: int = 5,
              min_dt: float = 1e-12) -> LiftResult:
    """Continuation of gamma through f starting at the preimage z0.

    Adaptive sub-stepping: the predictor solves J dz = dw, the corrector
    Newton-iterates to tol / 100; a step halves when the corrector needs
    more than ``max_newton`` iterations or drifts beyond its predictor.
    Stops with status hit-critical when the Jacobian vanishes or changes
    sign between accepted vertices, or left-window / newton-diverged as
    appropriate.
    """
    if not (tol > 0.0):
        raise ValueError("tol must be positive")
    z = np.asarray(z0, dtype=float).reshape(2).copy()
    g = gamma.vertices
    u0, v0, ux, uy, vx, vy = _wirtinger_scalar(map, z[0], z[1])
    if np.hypot(u0 - g[0, 0], v0 - g[0, 1]) > tol:
        raise ValueError("z0 is not a preimage of gamma's start within tol")
    tol_int = tol / CORRECTOR_DIVISOR
    # Sense is tracked, not magnitude: a small |J| on an ill-conditioned
    # branch is still regular, a sign flip is not.
    det0 = ux * vy - uy * vx
    jac_sign = 0.0 if not np.isfinite(det0) else float(np.sign(det0))
    verts = [z.copy()]
    targets = [g[0].copy()]
    rows = [0]
    status = "complete"

    def corrector(z_start, target, z_pred, pred_norm):
        zz = z_pred.copy()
        for it in range(1, max_newton + 4):
            u, v, ux, uy, vx, vy = _wirtinger_scalar(map, zz[0], zz[1])
            rx, ry = u - target[0], v - target[1]
            res = np.hypot(rx, ry)
            if not np.isfinite(res):
                return None, it
            if res <= tol_int:
                drift = np.hypot(*(zz - z_pred))
                if drift > max(pred_norm, 10.0 * tol):
                    return None, it
                return zz, it
            det = ux * vy - uy * vx
            if det == 0.0 or not np.isfinite(det):
                return None, it
            zz = zz - np.asarray([(vy * rx - uy * ry) / det, (-vx * rx + ux * ry) / det])
            if not np.isfinite(zz).all():
                return None, it
        return None, max_newton + 3

    with np.errstate(all="ignore"):
        for k in range(g.shape[0] - 1):
            wa, wb = g[k], g[k + 1]
            t = 0.0
            dt = 1.0
            while t < 1.0 and status == "complete":
                dt = min(dt, 1.0 - t)
                target = wa + (t + dt) * (wb - wa)
                u, v, ux, uy, vx, vy = _wirtinger_scalar(map, z[0], z[1])
                det = ux * vy - uy * vx
                if det != 0.0 and np.isfinite(det):
                    dwx, dwy = target[0] - u, target[1] - v
                    step = np.asarray([(vy * dwx - uy * dwy) / det, (-vx * dwx + ux * dwy) / det])
                else:
                    step = np.asarray([np.nan, np.nan])
                accepted = False
                if np.isfinite(step).all():
                    z_pred = z + step
                    z_new, iters = corrector(z, target, z_pred, float(np.hypot(*step)))
                    if z_new is not None and iters <= max_newton:
                        z = z_new
                        t += dt
                        verts.append(z.copy())
                        targets.append(target.copy())
                        accepted = True
                        if iters <= 2:
                            dt = min(1.0, dt * 2.0)
                if accepted:
                    u, v, ux, uy, vx, vy = _wirtinger_scalar(map, z[0], z[1])
                    jac = ux * vy - uy * vx
                    if (not np.isfinite(jac) or jac == 0.0
                            or (jac_sign != 0.0 and jac * jac_sign < 0.0)):
                        status = "hit-critical"
                    elif window is not None and not window.contains(z[0], z[1]):
                        status = "left-window"
                    else:
                        jac_sign = float(np.sign(jac))
                else:
                    dt *= 0.5
                    if dt < min_dt:
                        status = "newton-diverged"
            if status != "complete":
                break
            rows.append(len(verts) - 1)

    varr = np.asarray(verts)
    tarr = np.asarray(targets)
    u, v = evaluate_grid(map, varr[:, 0], varr[:, 1])
    resid = np.hypot(u - tarr[:, 0], v - tarr[:, 1])
    max_res = float(resid.max()) if np.isfinite(resid).all() else float("inf")
    lifted = None
    if varr.shape[0] >= 2:
        keep = np.concatenate([
            [True], np.hypot(np.diff(varr[:, 0]), np.diff(varr[:, 1])) > 0.0
        ])
        if keep.sum() >= 2:
            lifted = PolyPath(varr[keep])
            tarr = tarr[keep]
            kept_rows = np.cumsum(keep) - 1
            rows = [int(kept_rows[r]) for r in rows]
    return LiftResult(lifted=lifted, status=status, max_residual=max_res,
                      image_targets=tarr, gamma_vertex_rows=rows)


def lift_all(map: PlanarMap, gamma: PolyPath, window: Window, tol: float,
             seeds: int = 64, seed: int = 0, confine: bool = True) -> list[LiftResult]:
    """One lift per preimage of gamma's start, ordered by start point.

    ``window`` seeds the preimage search; with ``confine`` false the lifts
    may leave it (no left-window stop).  Pairwise separation at matched
    gamma vertices is recorded on each result (None for a single lift).
    """
    starts = preimages(map, gamma.first, window, tol, seeds=seeds, seed=seed)
    results = [
        lift_path(map, gamma, np.asarray(s), tol, window=window if confine else None)
        for s in starts
    ]
    for a in range(len(results)):
        best = np.inf
        ra = results[a]
        if ra.lifted is None:
            continue
        for b in range(len(results)):
            if b == a:
                continue
            rb = results[b]
            if rb.lifted is None:
                continue
            common = min(len(ra.gamma_vertex_rows), len(rb.gamma_vertex_rows))
            if common == 0:
                continue
            pa = ra.lifted.vertices[[ra.gamma_vertex_rows[i] for i in range(common)]]
            pb = rb.lifted.vertices[[rb.gamma_vertex_rows[i] for i in range(common)]]
            sep = float(np.hypot(pa[:, 0] - pb[:, 0], pa[:, 1] - pb[:, 1]).min())
            best = min(best, sep)
        ra.min_separation_from_others = None if best == np.inf else best
    return results
