"""Valence sampling over an image-plane window.

Each cell's valence is the number of distinct preimages of its center found
inside a preimage search window; counts are window-limited and flagged as
such.  A neighbor pass reuses roots found in adjacent cells as extra Newton
seeds, which fills basin gaps cheaply because valence is locally constant
away from the partition boundary.  Cells adjacent to a valence change are
marked boundary/uncertain.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .critical import PolylineSet, Window
from .field import PlanarMap
from .lift import newton_refine_batch, preimages

__all__ = [
    "ValenceGrid",
    "InfiniteValenceAssessment",
    "OverlayReport",
    "valence_at",
    "assess_infinite_valence",
    "valence_map",
    "partition_overlay",
]

INFINITE_CAP = 64


def valence_at(map: PlanarMap, w, zwindow: Window, tol: float,
               seeds: int = 64, seed: int = 0) -> int:
    """Window-limited valence: distinct preimages of w inside zwindow."""
    return len(preimages(map, w, zwindow, tol, seeds=seeds, seed=seed))


@dataclass(frozen=True)
class InfiniteValenceAssessment:
    infinite: bool
    count: int
    grown_count: int
    cap: int
    zwindow: Window


def assess_infinite_valence(map: PlanarMap, w, zwindow: Window, tol: float,
                            cap: int = INFINITE_CAP, seeds: int = 64,
                            seed: int = 0) -> InfiniteValenceAssessment:
    """Infinite-valence heuristic: count exceeds cap and keeps growing.

    The count is recomputed on the window enlarged 2x about its center; the
    flag is set only when both the cap is exceeded and the enlarged window
    finds strictly more preimages.  Never a proof of actual infinity.
    """
    count = valence_at(map, w, zwindow, tol, seeds=seeds, seed=seed)
    grown = valence_at(map, w, zwindow.scaled(2.0), tol, seeds=seeds, seed=seed)
    return InfiniteValenceAssessment(
        infinite=(count > cap and grown > count),
        count=count,
        grown_count=grown,
        cap=cap,
        zwindow=zwindow,
    )


@dataclass
class ValenceGrid:
    """Cellwise valence over an image window (window-limited counts).

    ``valence[i, j]`` is the count at the center of cell (i, j); the window's
    nx/ny are interpreted as cell counts here.  ``boundary`` marks cells with
    a 4-neighbor whose count differs.
    """

    wwindow: Window
    zwindow: Window
    valence: np.ndarray
    boundary: np.ndarray
    tol: float
    seeds_per_cell: int
    seed: int
    window_limited: bool = True

    def cell_centers(self):
        dx = (self.wwindow.xmax - self.wwindow.xmin) / self.wwindow.nx
        dy = (self.wwindow.ymax - self.wwindow.ymin) / self.wwindow.ny
        cx = self.wwindow.xmin + (np.arange(self.wwindow.nx) + 0.5) * dx
        cy = self.wwindow.ymin + (np.arange(self.wwindow.ny) + 0.5) * dy
        return cx, cy

    @property
    def cell_diagonal(self) -> float:
        dx = (self.wwindow.xmax - self.wwindow.xmin) / self.wwindow.nx
        dy = (self.wwindow.ymax - self.wwindow.ymin) / self.wwindow.ny
        return float(np.hypot(dx, dy))


def _dedupe_cell_roots(rx: np.ndarray, ry: np.ndarray, radius: float):
    """Greedy dedupe of converged roots for one cell, lexicographic order."""
    if rx.shape[0] == 0:
        return rx, ry
    order = np.lexsort((ry, rx))
    rx, ry = rx[order], ry[order]
    keep_x = [rx[0]]
    keep_y = [ry[0]]
    for k in range(1, rx.shape[0]):
        dx = np.asarray(keep_x) - rx[k]
        dy = np.asarray(keep_y) - ry[k]
        if float(np.hypot(dx, dy).min()) > radius:
            keep_x.append(rx[k])
            keep_y.append(ry[k])
    return np.asarray(keep_x), np.asarray(keep_y)


def valence_map(map: PlanarMap, wwindow: Window, zwindow: Window, tol: float,
                seeds_per_cell: int = 12, seed: int = 0,
                neighbor_pass: bool = True) -> ValenceGrid:
    """Valence at every cell center of ``wwindow``.

    ``seeds_per_cell`` is the side of the per-cell Newton seed grid over
    ``zwindow``.  The optional neighbor pass re-seeds each cell with the
    roots found for its 4-neighbors.
    """
    if not (tol > 0.0):
        raise ValueError("tol must be positive")
    nx, ny = wwindow.nx, wwindow.ny
    dx = (wwindow.xmax - wwindow.xmin) / nx
    dy = (wwindow.ymax - wwindow.ymin) / ny
    cx = wwindow.xmin + (np.arange(nx) + 0.5) * dx
    cy = wwindow.ymin + (np.arange(ny) + 0.5) * dy
    sxs = np.linspace(zwindow.xmin, zwindow.xmax, seeds_per_cell)
    sys_ = np.linspace(zwindow.ymin, zwindow.ymax, seeds_per_cell)
    SX, SY = np.meshgrid(sxs, sys_, indexing="ij")
    seed_x = SX.ravel()
    seed_y = SY.ravel()
    rng = np.random.default_rng(seed)
    jx = rng.uniform(-0.45, 0.45, seed_x.shape) * (sxs[1] - sxs[0] if seeds_per_cell > 1 else 1.0)
    jy = rng.uniform(-0.45, 0.45, seed_y.shape) * (sys_[1] - sys_[0] if seeds_per_cell > 1 else 1.0)
    seed_x = seed_x + jx
    seed_y = seed_y + jy
    S = seed_x.shape[0]
    span = max(zwindow.xmax - zwindow.xmin, zwindow.ymax - zwindow.ymin)
    cap = 4.0 * span
    radius = 10.0 * tol

    n_cells = nx * ny
    centers = np.column_stack([np.repeat(cx, ny), np.tile(cy, nx)])  # row-major (i, j)
    roots: list[tuple[np.ndarray, np.ndarray]] = [None] * n_cells  # type: ignore[list-item]
    chunk = max(1, int(1_000_000 // S))
    for start in range(0, n_cells, chunk):
        stop = min(n_cells, start + chunk)
        C = stop - start
        tx = np.repeat(centers[start:stop, 0], S)
        ty = np.repeat(centers[start:stop, 1], S)
        gx = np.tile(seed_x, C)
        gy = np.tile(seed_y, C)
        rx, ry, res = newton_refine_batch(map, gx, gy, tx, ty, tol, max_iter=30, step_cap=cap)
        ok = (
            (res <= tol)
            & (rx >= zwindow.xmin) & (rx <= zwindow.xmax)
            & (ry >= zwindow.ymin) & (ry <= zwindow.ymax)
        )
        for c in range(C):
            sl = slice(c * S, (c + 1) * S)
            m = ok[sl]
            roots[start + c] = _dedupe_cell_roots(rx[sl][m], ry[sl][m], radius)

    if neighbor_pass:
        # roots of each cell, retargeted at the 4 neighbor centers
        flat_idx = []
        flat_x = []
        flat_y = []
        for c in range(n_cells):
            if roots[c][0].shape[0]:
                flat_idx.append(np.full(roots[c][0].shape[0], c))
                flat_x.append(roots[c][0])
                flat_y.append(roots[c][1])
        if flat_idx:
            flat_idx = np.concatenate(flat_idx)
            flat_x = np.concatenate(flat_x)
            flat_y = np.concatenate(flat_y)
            ii = flat_idx // ny
            jj = flat_idx % ny
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ti = ii + di
                tj = jj + dj
                valid = (ti >= 0) & (ti < nx) & (tj >= 0) & (tj < ny)
                if not valid.any():
                    continue
                tcell = (ti[valid] * ny + tj[valid]).astype(int)
                rx, ry, res = newton_refine_batch(
                    map, flat_x[valid], flat_y[valid],
                    centers[tcell, 0], centers[tcell, 1], tol,
                    max_iter=20, step_cap=cap,
                )
                ok = (
                    (res <= tol)
                    & (rx >= zwindow.xmin) & (rx <= zwindow.xmax)
                    & (ry >= zwindow.ymin) & (ry <= zwindow.ymax)
                )
                for c in np.unique(tcell[ok]):
                    m = ok & (tcell == c)
                    ax, ay = roots[int(c)]
                    merged_x = np.concatenate([ax, rx[m]])
                    merged_y = np.concatenate([ay, ry[m]])
                    roots[int(c)] = _dedupe_cell_roots(merged_x, merged_y, radius)

    counts = np.asarray([roots[c][0].shape[0] for c in range(n_cells)]).reshape(nx, ny)
    boundary = np.zeros_like(counts, dtype=bool)
    boundary[:-1, :] |= counts[:-1, :] != counts[1:, :]
    boundary[1:, :] |= counts[1:, :] != counts[:-1, :]
    boundary[:, :-1] |= counts[:, :-1] != counts[:, 1:]
    boundary[:, 1:] |= counts[:, 1:] != counts[:, :-1]
    return ValenceGrid(
        wwindow=wwindow,
        zwindow=zwindow,
        valence=counts,
        boundary=boundary,
        tol=tol,
        seeds_per_cell=seeds_per_cell,
        seed=seed,
    )


@dataclass(frozen=True)
class OverlayReport:
    """Agreement between valence-change cells and the partitioning set."""

    fraction_within: float
    threshold: float
    n_boundary_cells: int
    distances: np.ndarray

    @property
    def vacuous(self) -> bool:
        return self.n_boundary_cells == 0


def partition_overlay(grid: ValenceGrid, fs: PolylineSet,
                      cluster: PolylineSet) -> OverlayReport:
    """Distance from each boundary cell center to f(S) plus cluster points.

    Reports the fraction of boundary cells within 2 cell diagonals of the
    combined set; 1.0 vacuously when there are no boundary cells.
    """
    threshold = 2.0 * grid.cell_diagonal
    idx = np.argwhere(grid.boundary)
    if idx.shape[0] == 0:
        return OverlayReport(1.0, threshold, 0, np.empty(0))
    cx, cy = grid.cell_centers()
    pts = np.column_stack([cx[idx[:, 0]], cy[idx[:, 1]]])
    combined = fs.merged_with(cluster)
    if combined.is_empty():
        dist = np.full(pts.shape[0], np.inf)
    else:
        dist = combined.distance_to(pts)
    frac = float((dist <= threshold).mean())
    return OverlayReport(frac, threshold, int(idx.shape[0]), dist)
