"""Quasiregularity certificates and schlicht-disk radii for point sequences.

Given a finite sequence of points, ``check_conditions`` measures its
distance to the critical set, the Jacobian infimum, the dilatation bound
and the Jacobian-ratio bound over closed balls, then assembles the
derived constants (K, Lambda, r0, r1) into an immutable certificate.
All suprema are sampled on polar grids and the certificate records the
resolution; nothing claims a true supremum.  ``schlicht_disk_verify``
tests the promised covered disk by Newton solves, ``normalized_map``
exposes the rescaled map used in that argument, and
``diagnose_sequence`` runs the four-way failure dichotomy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .critical import Window, critical_contours, nearest_critical_distance
from .field import MU_FZ_FLOOR, PlanarMap, Point, conjugate_map, evaluate_grid, wirtinger_grid
from .lift import newton_refine_batch

__all__ = [
    "SequenceCertificate",
    "SchlichtReport",
    "NormalizedMap",
    "DiagnosisReport",
    "check_conditions",
    "cgh_radii",
    "bloch_radius_k",
    "schlicht_disk_verify",
    "normalized_map",
    "diagnose_sequence",
]

BALL_GRID = (24, 24)  # radial x angular samples per closed ball
J_RATIO_CAP = 1e12


@dataclass(frozen=True)
class SequenceCertificate:
    """Measured constants for a sequence, with pass/fail verdict.

    delta: distance from the sequence to the sampled critical contours.
    eta_sq: infimum of the Jacobian over the sequence points.
    M: sampled supremum of |mu| over the closed rho-balls.
    j_ratio_sup: sampled supremum of J(z)/J(z_n) over the balls.
    K = (1+M)/(1-M); Lambda = K*sqrt(j_ratio_sup);
    r0 = pi/(8(1+Lambda)); r1 = r0*rho*sqrt(eta_sq)/sqrt(K).
    """

    delta: float
    eta_sq: float
    rho: float
    M: float
    K: float
    j_ratio_sup: float
    Lambda: float
    r0: float
    r1: float
    passed: bool
    violations: tuple
    metadata: dict = field(default_factory=dict, compare=False)


def _ball_fields(map: PlanarMap, centers: np.ndarray, rho: float):
    """Sample J, |mu| and Lambda^2 on closed rho-balls around each center.

    Returns arrays of shape (n_centers, n_samples); sample 0 is the center.
    """
    n_r, n_t = BALL_GRID
    rr = rho * (np.arange(1, n_r + 1) / n_r)
    th = np.arange(n_t) * (2.0 * math.pi / n_t)
    R, T = np.meshgrid(rr, th, indexing="ij")
    ox = np.concatenate([[0.0], (R * np.cos(T)).ravel()])
    oy = np.concatenate([[0.0], (R * np.sin(T)).ravel()])
    x = (centers[:, 0][:, None] + ox[None, :]).ravel()
    y = (centers[:, 1][:, None] + oy[None, :]).ravel()
    _, _, ux, uy, vx, vy = wirtinger_grid(map, x, y)
    fz = np.hypot(0.5 * (ux + vy), 0.5 * (vx - uy))
    fzb = np.hypot(0.5 * (ux - vy), 0.5 * (vx + uy))
    jac = ux * vy - uy * vx
    with np.errstate(divide="ignore", invalid="ignore"):
        mu = np.where(fz > MU_FZ_FLOOR * (1.0 + fzb), fzb / fz, np.inf)
    lam_sq = (fz + fzb) ** 2
    shape = (centers.shape[0], ox.size)
    return jac.reshape(shape), mu.reshape(shape), lam_sq.reshape(shape)


def check_conditions(map: PlanarMap, seq, rho: float, critical_window: Window,
                     on_nonpositive_jacobian: str | None = None,
                     j_ratio_cap: float = J_RATIO_CAP) -> SequenceCertificate:
    """Certificate for a finite sequence at ball radius ``rho``.

    ``on_nonpositive_jacobian`` selects the repair when some J(z_n) <= 0:
    "conjugate-flip" re-runs on the conjugate map (v negated),
    "subsequence" drops the offending points, None records a violation.
    """
    if not (rho > 0.0):
        raise ValueError("rho must be positive")
    pts = np.asarray(seq, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("sequence is empty")
    _, _, ux, uy, vx, vy = wirtinger_grid(map, pts[:, 0], pts[:, 1])
    j_center = ux * vy - uy * vx
    violations = []
    bad = ~(np.isfinite(j_center) & (j_center > 0.0))
    if bad.any():
        if on_nonpositive_jacobian == "conjugate-flip":
            return check_conditions(conjugate_map(map), seq, rho, critical_window,
                                    on_nonpositive_jacobian=None,
                                    j_ratio_cap=j_ratio_cap)
        if on_nonpositive_jacobian == "subsequence":
            if bad.all():
                raise ValueError("no sequence point has positive Jacobian")
            return check_conditions(map, pts[~bad], rho, critical_window,
                                    on_nonpositive_jacobian=None,
                                    j_ratio_cap=j_ratio_cap)
        violations.append({
            "kind": "nonpositive-jacobian",
            "indices": [int(i) for i in np.nonzero(bad)[0]],
            "options": ["conjugate-flip", "subsequence"],
        })
    contours = critical_contours(map, critical_window)
    delta = min(
        nearest_critical_distance(Point(float(p[0]), float(p[1])), contours)
        for p in pts
    )
    eta_sq = float(j_center.min()) if np.isfinite(j_center).all() else float("-inf")
    jac, mu, lam_sq = _ball_fields(map, pts, rho)
    M = float(mu.max())
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = jac / j_center[:, None]
    ratio = np.where(np.isfinite(ratio), ratio, np.inf)
    j_ratio_sup = float(ratio.max()) if not bad.any() else float("inf")
    K = (1.0 + M) / (1.0 - M) if M < 1.0 else float("inf")
    Lambda = K * math.sqrt(j_ratio_sup) if math.isfinite(K) and math.isfinite(j_ratio_sup) else float("inf")
    r0 = math.pi / (8.0 * (1.0 + Lambda)) if math.isfinite(Lambda) else 0.0
    if math.isfinite(K) and K > 0.0 and eta_sq > 0.0:
        r1 = r0 * rho * math.sqrt(eta_sq) / math.sqrt(K)
    else:
        r1 = 0.0
    if not (delta > 0.0):
        violations.append({"kind": "zero-critical-distance", "delta": delta})
    if not (eta_sq > 0.0):
        violations.append({"kind": "nonpositive-jacobian-infimum", "eta_sq": eta_sq})
    if not (j_ratio_sup < j_ratio_cap):
        violations.append({"kind": "unbounded-jacobian-ratio", "j_ratio_sup": j_ratio_sup})
    if not (M < 1.0):
        violations.append({"kind": "dilatation-at-least-one", "M": M})
    passed = (delta > 0.0) and (eta_sq > 0.0) and (j_ratio_sup < j_ratio_cap) and (M < 1.0)
    qr_excess = float((lam_sq - K * jac).max()) if math.isfinite(K) else float("inf")
    metadata = {
        "ball_grid": BALL_GRID,
        "n_points": int(pts.shape[0]),
        "critical_window": (critical_window.xmin, critical_window.xmax,
                            critical_window.ymin, critical_window.ymax,
                            critical_window.nx, critical_window.ny),
        "caveat": "suprema and infima sampled at the recorded resolution",
        "lambda_used": Lambda,
        "lambda_sq_bound": K * K * j_ratio_sup if math.isfinite(K) else float("inf"),
        "qr_max_excess": qr_excess,
    }
    return SequenceCertificate(
        delta=float(delta), eta_sq=eta_sq, rho=float(rho), M=M, K=K,
        j_ratio_sup=j_ratio_sup, Lambda=Lambda, r0=r0, r1=r1,
        passed=passed, violations=tuple(violations), metadata=metadata,
    )


def cgh_radii(Lambda: float) -> tuple[float, float]:
    """Schlicht-disk radii (rho0, r0) for a normalized map with bound Lambda."""
    if not (Lambda >= 1.0):
        raise ValueError("Lambda must be at least 1")
    rho0 = math.pi / (4.0 * (1.0 + Lambda))
    return rho0, 0.5 * rho0


def bloch_radius_k(K: float) -> float:
    """Schlicht-disk radius for a K-quasiregular normalized map."""
    if not (K >= 1.0):
        raise ValueError("K must be at least 1")
    return math.pi / (8.0 * math.sqrt(2.0) * math.sqrt(K) * (1.0 + 2.0 * K))


@dataclass(frozen=True)
class SchlichtReport:
    """Covered-disk check: fraction of target values actually attained."""

    hit_fraction: float
    max_residual: float
    w_grid: int
    n_targets: int
    n_hits: int
    center: Point
    r1: float
    rho: float


def schlicht_disk_verify(map: PlanarMap, zn: Point, rho: float, r1: float,
                         w_grid: int = 15, tol: float = 1e-10,
                         seed_rings: int = 12) -> SchlichtReport:
    """Check that values on a disk of radius r1 around f(zn) are attained.

    Targets form a w_grid x w_grid square grid clipped to the disk; each is
    solved by Newton from polar seeds inside B(zn, rho).  A target counts
    as hit when some solve lands in the closed (slightly padded) ball with
    residual at most tol.
    """
    if not (r1 > 0.0):
        raise ValueError("r1 must be positive")
    u, v = evaluate_grid(map, np.asarray([zn[0]]), np.asarray([zn[1]]))
    wc = np.asarray([u[0], v[0]])
    side = np.linspace(-r1, r1, w_grid)
    WX, WY = np.meshgrid(side, side, indexing="ij")
    inside = np.hypot(WX, WY) <= r1
    targets = np.column_stack([wc[0] + WX[inside], wc[1] + WY[inside]])
    n_t = targets.shape[0]
    rr = rho * (np.arange(1, seed_rings + 1) / seed_rings)
    th = np.arange(2 * seed_rings) * (math.pi / seed_rings)
    R, T = np.meshgrid(rr, th, indexing="ij")
    sx = np.concatenate([[0.0], (R * np.cos(T)).ravel()]) + zn[0]
    sy = np.concatenate([[0.0], (R * np.sin(T)).ravel()]) + zn[1]
    n_s = sx.size
    x = np.tile(sx, n_t)
    y = np.tile(sy, n_t)
    wx = np.repeat(targets[:, 0], n_s)
    wy = np.repeat(targets[:, 1], n_s)
    fx, fy, res = newton_refine_batch(map, x, y, wx, wy, tol=tol,
                                      step_cap=8.0 * rho)
    in_ball = np.hypot(fx - zn[0], fy - zn[1]) <= rho * (1.0 + 1e-9)
    ok = (res <= tol) & in_ball
    hit_res = np.where(ok, res, np.inf).reshape(n_t, n_s).min(axis=1)
    hits = np.isfinite(hit_res)
    max_residual = float(hit_res[hits].max()) if hits.any() else float("nan")
    return SchlichtReport(
        hit_fraction=float(hits.sum()) / n_t if n_t else 0.0,
        max_residual=max_residual, w_grid=w_grid, n_targets=n_t,
        n_hits=int(hits.sum()), center=Point(float(wc[0]), float(wc[1])),
        r1=float(r1), rho=float(rho),
    )


class NormalizedMap:
    """Rescaled map F(z) = (f(zn + rho z) - f(zn)) / (rho * lambda_f(zn)).

    F(0) = 0 and the minimum stretch of F at 0 is 1; both are verified at
    construction.  Exposes the grid evaluators of the base map API.
    """

    def __init__(self, base: PlanarMap, zn: Point, rho: float):
        if not (rho > 0.0):
            raise ValueError("rho must be positive")
        self.base = base
        self.zn = Point(float(zn[0]), float(zn[1]))
        self.rho = float(rho)
        u, v, ux, uy, vx, vy = wirtinger_grid(
            base, np.asarray([self.zn.x]), np.asarray([self.zn.y])
        )
        fz = math.hypot(0.5 * (ux[0] + vy[0]), 0.5 * (vx[0] - uy[0]))
        fzb = math.hypot(0.5 * (ux[0] - vy[0]), 0.5 * (vx[0] + uy[0]))
        lam = abs(fz - fzb)
        if not (lam > 1e-13 * (1.0 + fz + fzb)):
            raise ValueError("minimum stretch vanishes at the base point")
        self.w_center = (float(u[0]), float(v[0]))
        self.lam = lam
        f0 = self.evaluate_grid(np.asarray([0.0]), np.asarray([0.0]))
        if max(abs(f0[0][0]), abs(f0[1][0])) > 1e-10:
            raise AssertionError("normalization failed: F(0) != 0")
        if abs(self.lambda_at_origin() - 1.0) > 1e-10:
            raise AssertionError("normalization failed: stretch at 0 != 1")

    def evaluate_grid(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u, v = evaluate_grid(self.base, self.zn.x + self.rho * x,
                             self.zn.y + self.rho * y)
        s = self.rho * self.lam
        return (u - self.w_center[0]) / s, (v - self.w_center[1]) / s

    def wirtinger_grid(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u, v, ux, uy, vx, vy = wirtinger_grid(
            self.base, self.zn.x + self.rho * x, self.zn.y + self.rho * y
        )
        s = self.rho * self.lam
        return ((u - self.w_center[0]) / s, (v - self.w_center[1]) / s,
                ux / self.lam, uy / self.lam, vx / self.lam, vy / self.lam)

    def lambda_at_origin(self) -> float:
        _, _, ux, uy, vx, vy = self.wirtinger_grid(np.asarray([0.0]), np.asarray([0.0]))
        fz = math.hypot(0.5 * (ux[0] + vy[0]), 0.5 * (vx[0] - uy[0]))
        fzb = math.hypot(0.5 * (ux[0] - vy[0]), 0.5 * (vx[0] + uy[0]))
        return abs(fz - fzb)

    def jacobian_at_origin(self) -> float:
        _, _, ux, uy, vx, vy = self.wirtinger_grid(np.asarray([0.0]), np.asarray([0.0]))
        return float(ux[0] * vy[0] - uy[0] * vx[0])


def normalized_map(map: PlanarMap, zn: Point, rho: float) -> NormalizedMap:
    return NormalizedMap(map, zn, rho)


@dataclass(frozen=True)
class DiagnosisReport:
    """Which of the four sequence-failure conditions hold at this truncation.

    Conditions: 1 critical-set distance tends to 0; 2 Jacobian tends to 0;
    3 no trial radius bounds the Jacobian ratio; 4 no trial radius keeps
    the dilatation below 1.
    """

    conditions: dict
    details: dict
    note: str | None = None

    def any_hold(self) -> bool:
        return any(self.conditions.values())


def diagnose_sequence(map: PlanarMap, seq, rho_trials, critical_window: Window,
                      j_ratio_cap: float = J_RATIO_CAP) -> DiagnosisReport:
    """Evaluate the four failure conditions over the trial radii."""
    pts = np.asarray(seq, dtype=float).reshape(-1, 2)
    n = pts.shape[0]
    if n == 0:
        raise ValueError("sequence is empty")
    contours = critical_contours(map, critical_window)
    dists = np.asarray([
        nearest_critical_distance(Point(float(p[0]), float(p[1])), contours)
        for p in pts
    ])
    cell = critical_window.cell_diagonal
    tail = dists[n // 2 :]
    cond1 = bool(np.isfinite(tail).any() and np.min(tail) <= 2.0 * cell)
    _, _, ux, uy, vx, vy = wirtinger_grid(map, pts[:, 0], pts[:, 1])
    j_center = ux * vy - uy * vx
    jabs = np.abs(j_center)
    head_max = float(np.max(jabs[: max(1, n // 2)]))
    tail_min = float(np.min(jabs[n // 2 :]))
    cond2 = bool(tail_min <= max(1e-12, 1e-3 * head_max))
    ratio_by_rho = {}
    mu_by_rho = {}
    for rho in rho_trials:
        jac, mu, _ = _ball_fields(map, pts, float(rho))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = jac / j_center[:, None]
        ratio = np.where(np.isfinite(ratio) & (j_center[:, None] > 0.0), ratio, np.inf)
        ratio_by_rho[float(rho)] = float(ratio.max())
        mu_by_rho[float(rho)] = float(mu.max())
    cond3 = bool(all(r >= j_ratio_cap for r in ratio_by_rho.values())) if ratio_by_rho else True
    cond4 = bool(all(m >= 1.0 for m in mu_by_rho.values())) if mu_by_rho else True
    conditions = {1: cond1, 2: cond2, 3: cond3, 4: cond4}
    note = None
    if not any(conditions.values()):
        note = ("no condition holds at this truncation; either the sequence "
                "admits a passing certificate or the dichotomy hypothesis "
                "(a finite-valence cluster point) is vacuous here")
    details = {
        "critical_distances": [float(d) for d in dists],
        "jacobians": [float(j) for j in j_center],
        "j_ratio_by_rho": ratio_by_rho,
        "dilatation_by_rho": mu_by_rho,
        "cell_diagonal": cell,
    }
    return DiagnosisReport(conditions=conditions, details=details, note=note)
