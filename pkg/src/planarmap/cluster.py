"""Cluster-value estimation at infinity and sequence manufacture.

``cluster_samples`` images large circles and keeps values that persist
across scales: a sample persists when some strictly larger radius produces
a witness within ``eps_persist``.  This witness rule is monotone in the
radii list (adding radii can only add witnesses), which is the tested
stand-in for accumulation in the limit.  Sequences toward a target value
are produced either by scanning growing circles or by following a caller-
supplied curve, and can be nudged off a partitioning set while keeping the
image-error schedule of the staged constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .critical import PolylineSet, Window
from .field import PlanarMap, Point, evaluate_grid, wirtinger_grid

__all__ = [
    "ClusterError",
    "RefineResult",
    "cluster_samples",
    "sequence_to_cluster",
    "off_partition_refine",
]

DEFAULT_CIRCLE_SAMPLES = 4096


class ClusterError(RuntimeError):
    """Cluster-stage failure with a stable reason slug."""

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


def _circle_values(map: PlanarMap, radius: float, samples: int):
    theta = np.arange(samples) * (2.0 * math.pi / samples)
    x = radius * np.cos(theta)
    y = radius * np.sin(theta)
    u, v = evaluate_grid(map, x, y)
    return x, y, u, v


def cluster_samples(map: PlanarMap, radii, wwindow: Window,
                    samples_per_radius: int = DEFAULT_CIRCLE_SAMPLES,
                    eps_persist: float | None = None) -> PolylineSet:
    """Persistent image values of circles |z| = R inside ``wwindow``.

    ``radii`` must be strictly increasing with at least 3 entries.  A value
    sampled at one radius is kept when a strictly larger radius has a
    sample within ``eps_persist`` (default: twice the window cell
    diagonal).  Samples from the largest radius have no witnesses and are
    treated as transients.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing with at least 3 values")
    if eps_persist is None:
        eps_persist = 2.0 * wwindow.cell_diagonal
    layers = []
    for r in radii:
        _, _, u, v = _circle_values(map, r, samples_per_radius)
        ok = (
            np.isfinite(u) & np.isfinite(v)
            & (u >= wwindow.xmin) & (u <= wwindow.xmax)
            & (v >= wwindow.ymin) & (v <= wwindow.ymax)
        )
        layers.append(np.column_stack([u[ok], v[ok]]))
    persistent = []
    for k in range(len(radii) - 1):
        pts = layers[k]
        if pts.shape[0] == 0:
            continue
        witnesses = np.vstack([layers[m] for m in range(k + 1, len(radii))])
        if witnesses.shape[0] == 0:
            continue
        chunk = max(1, int(4_000_000 // max(1, witnesses.shape[0])))
        keep = np.zeros(pts.shape[0], dtype=bool)
        for s in range(0, pts.shape[0], chunk):
            p = pts[s : s + chunk]
            dx = p[:, None, 0] - witnesses[None, :, 0]
            dy = p[:, None, 1] - witnesses[None, :, 1]
            keep[s : s + chunk] = np.sqrt(dx * dx + dy * dy).min(axis=1) <= eps_persist
        persistent.append(pts[keep])
    cloud = np.vstack(persistent) if persistent else np.empty((0, 2))
    return PolylineSet(polylines=[], cloud=cloud, cloud_source="cluster-estimate")


# ---------------------------------------------------------------------------
# Sequences toward a target value


def _golden_refine(fn, lo: float, hi: float, iters: int = 80) -> float:
    """Golden-section minimizer of a scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _circle_best(map: PlanarMap, radius: float, wx: float, wy: float,
                 n_coarse: int = 1024, keep: int = 6, depth: int = 3):
    """Best approach to (wx, wy) on the circle |z| = radius.

    The image miss can dip inside a band far narrower than any single
    scan resolves, so candidate cells are selected per level by the full
    miss and by each component residual separately (a tame component
    localizes the band even when the other component explodes), then the
    search zooms into the winners.  Returns (theta, miss).
    """
    spans = [(0.0, 2.0 * math.pi)]
    best_theta = 0.0
    best_miss = np.inf
    for level in range(depth + 1):
        n = n_coarse if level == 0 else 256
        lo = np.asarray([s[0] for s in spans])
        hi = np.asarray([s[1] for s in spans])
        theta = (lo[:, None] + (hi - lo)[:, None] * (np.arange(n) + 0.5)[None, :] / n).ravel()
        u, v = evaluate_grid(map, radius * np.cos(theta), radius * np.sin(theta))
        du = u - wx
        dv = v - wy
        miss = np.hypot(du, dv)
        miss = np.where(np.isfinite(miss), miss, np.inf)
        k = int(np.argmin(miss))
        if miss[k] < best_miss:
            best_miss = float(miss[k])
            best_theta = float(theta[k])
        cell = ((hi - lo) / n).repeat(n).reshape(lo.size, n).ravel()
        picks: set[int] = set()
        for key in (miss, np.abs(du), np.abs(dv)):
            finite = np.where(np.isfinite(key), key, np.inf)
            picks.update(int(i) for i in np.argsort(finite, kind="stable")[:keep])
        spans = [(theta[i] - cell[i], theta[i] + cell[i]) for i in sorted(picks)]
    for s_lo, s_hi in spans:
        def miss_at(th):
            uu, vv = evaluate_grid(
                map, np.asarray([radius * math.cos(th)]), np.asarray([radius * math.sin(th)])
            )
            m = float(np.hypot(uu[0] - wx, vv[0] - wy))
            return m if math.isfinite(m) else np.inf

        th = _golden_refine(miss_at, s_lo, s_hi)
        m = miss_at(th)
        if m < best_miss:
            best_miss = m
            best_theta = th
    return best_theta, best_miss


def sequence_to_cluster(map: PlanarMap, w0, n: int, strategy: str = "circle-solve",
                        curve=None, t_values=None, r_start: float = 2.0,
                        growth: float = 2.0,
                        samples: int = DEFAULT_CIRCLE_SAMPLES) -> list[Point]:
    """Points z_k with |z_k| strictly increasing and f(z_k) approaching w0.

    circle-solve scans growing circles for the best approach to ``w0`` and
    enforces a strictly decreasing image miss; user-curve evaluates a
    caller-supplied parametric curve at ``t_values`` and extracts such a
    subsequence.  Raises not-a-cluster-point-at-this-scale when the
    schedule cannot be met.
    """
    wx, wy = float(w0[0]), float(w0[1])
    out: list[Point] = []
    if strategy == "circle-solve":
        best_miss = np.inf
        r = float(r_start)
        attempts = 0
        while len(out) < n and attempts < 4 * n + 16:
            attempts += 1
            theta, m = _circle_best(map, r, wx, wy, n_coarse=max(256, samples // 4))
            if m < best_miss:
                best_miss = m
                out.append(Point(r * math.cos(theta), r * math.sin(theta)))
            r *= growth
        if len(out) < n:
            raise ClusterError(
                "not-a-cluster-point-at-this-scale",
                f"only {len(out)} of {n} circle solutions improved the image miss",
            )
        return out
    if strategy == "user-curve":
        if curve is None or t_values is None:
            raise ValueError("user-curve strategy needs curve and t_values")
        pts = np.asarray([curve(t) for t in t_values], dtype=float).reshape(-1, 2)
        u, v = evaluate_grid(map, pts[:, 0], pts[:, 1])
        moduli = np.hypot(pts[:, 0], pts[:, 1])
        miss = np.hypot(u - wx, v - wy)
        best_miss = np.inf
        best_mod = -np.inf
        for k in range(pts.shape[0]):
            if not (math.isfinite(miss[k]) and math.isfinite(moduli[k])):
                continue
            if moduli[k] > best_mod and miss[k] < best_miss:
                out.append(Point(float(pts[k, 0]), float(pts[k, 1])))
                best_mod = moduli[k]
                best_miss = miss[k]
            if len(out) == n:
                break
        if len(out) < n:
            raise ClusterError(
                "not-a-cluster-point-at-this-scale",
                f"curve yielded {len(out)} of {n} admissible points",
            )
        return out
    raise ValueError(f"unknown strategy {strategy!r}")


# ---------------------------------------------------------------------------
# Off-partition refinement


@dataclass(frozen=True)
class RefineResult:
    """Refined sequence with its audit schedule."""

    points: list[Point]
    originals: list[Point]
    indices: list[int]  # 1-based positions in the input sequence
    eps_n: list[float]
    margins: list[float]
    margin_floor: float
    skipped: dict = dataclass_field(default_factory=dict)  # index -> reason


def _cloud_margin_floor(ps: PolylineSet) -> float:
    """Resolution floor: 0.75 x median nearest-neighbor distance of the cloud."""
    cloud = ps.cloud
    if cloud.shape[0] < 2:
        return 0.0
    sub = cloud[:: max(1, cloud.shape[0] // 2000)]
    dx = sub[:, None, 0] - sub[None, :, 0]
    dy = sub[:, None, 1] - sub[None, :, 1]
    d = np.hypot(dx, dy)
    np.fill_diagonal(d, np.inf)
    return 0.75 * float(np.median(d.min(axis=1)))


def off_partition_refine(map: PlanarMap, seq, fs_plus_cluster: PolylineSet, w0,
                         eps: float, j_min: float = 1e-12,
                         rings: int = 6, ring_samples: int = 64,
                         margin_floor: float | None = None) -> RefineResult:
    """Nudge each sequence point so its image clears the partitioning set.

    Point z_n (1-based n) may move within 1/n; its image must stay within
    eps_n = min(eps - |w_n - w0|, |w_n - w0|) / 2 of the original image and
    clear the partitioning polylines and cloud by more than the clearance
    threshold min(floor, eps_n / 4), with |J_f| above ``j_min``.  The
    threshold is capped by eps_n because clearance can never be certified
    beyond the scale a point is allowed to move; without the cap, points
    deep along a partition line through w0 would always fail.

    ``margin_floor`` defaults to the cloud's own sampling scale; callers
    whose cloud mixes sampled cluster points with exact isolated image
    points should pass the floor of the sampled part only.

    Points with no admissible nudge are skipped with a reason; the error
    is raised only when every in-ball point fails, which signals that the
    partitioning set fills the sampled neighborhoods.
    """
    if not (eps > 0.0):
        raise ValueError("eps must be positive")
    pts = np.asarray(seq, dtype=float).reshape(-1, 2)
    wx, wy = float(w0[0]), float(w0[1])
    floor = (_cloud_margin_floor(fs_plus_cluster) if margin_floor is None
             else float(margin_floor))
    out: list[Point] = []
    originals: list[Point] = []
    indices: list[int] = []
    eps_list: list[float] = []
    margins: list[float] = []
    skipped: dict[int, str] = {}
    n_in_ball = 0
    for n0 in range(pts.shape[0]):
        n = n0 + 1
        z = pts[n0]
        u, v = evaluate_grid(map, z[:1], z[1:])
        wn = np.asarray([u[0], v[0]])
        gap = float(np.hypot(wn[0] - wx, wn[1] - wy))
        if not (0.0 < gap < eps):
            continue
        n_in_ball += 1
        eps_n = 0.5 * min(eps - gap, gap)
        threshold = min(floor, 0.25 * eps_n)
        ball = 1.0 / n
        best = None
        had_candidate = False
        for depth in range(8):
            radius = ball / 2.0**depth
            rr = radius * (np.arange(1, rings + 1) / rings)
            th = np.arange(ring_samples) * (2.0 * math.pi / ring_samples)
            R, T = np.meshgrid(rr, th, indexing="ij")
            cx = z[0] + (R * np.cos(T)).ravel()
            cy = z[1] + (R * np.sin(T)).ravel()
            cx = np.concatenate([[z[0]], cx])
            cy = np.concatenate([[z[1]], cy])
            cu, cv, ux, uy, vx, vy = wirtinger_grid(map, cx, cy)
            jac = ux * vy - uy * vx
            img_ok = (
                np.isfinite(cu) & np.isfinite(cv)
                & (np.hypot(cu - wn[0], cv - wn[1]) <= eps_n)
                & np.isfinite(jac) & (np.abs(jac) > j_min)
            )
            if not img_ok.any():
                continue
            had_candidate = True
            img = np.column_stack([cu[img_ok], cv[img_ok]])
            dist = fs_plus_cluster.distance_to(img)
            k = int(np.argmax(dist))
            if dist[k] > threshold and math.isfinite(dist[k]):
                cand_idx = np.nonzero(img_ok)[0][k]
                best = (float(cx[cand_idx]), float(cy[cand_idx]), float(dist[k]))
                break
        if best is None:
            skipped[n] = ("margin below clearance threshold" if had_candidate
                          else "no candidate with admissible image and jacobian")
            continue
        out.append(Point(best[0], best[1]))
        originals.append(Point(float(z[0]), float(z[1])))
        indices.append(n)
        eps_list.append(eps_n)
        margins.append(best[2])
    if not out:
        if n_in_ball:
            raise ClusterError(
                "refinement-failure",
                f"partitioning set fills the sampled neighborhoods of all "
                f"{n_in_ball} in-ball points",
            )
        raise ClusterError(
            "refinement-failure",
            "no sequence point lies strictly inside the eps ball around w0",
        )
    return RefineResult(points=out, originals=originals, indices=indices,
                        eps_n=eps_list, margins=margins, margin_floor=floor,
                        skipped=skipped)
