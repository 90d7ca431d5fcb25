"""SVG rendering for analysis artifacts.

Every figure is an 800x800 canvas (8 in at 100 dpi) saved as SVG with a
fixed hash salt and no embedded date, so reruns are byte-identical.
Polylines are stroked, point clouds drawn as radius-1 circles, and the
valence heat map uses a discrete ramp: one viridis band per count, with
the overflow band (count at the cap) at the top of the ramp.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib import colors as mcolors  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "planarmap"
plt.rcParams["svg.fonttype"] = "none"

__all__ = [
    "save_figure",
    "plot_polyline_set",
    "plot_valence_heatmap",
    "plot_trace_wplane",
    "plot_trace_zplane",
]

_CLOUD_PX = 1.0  # cloud marker radius in screen pixels


def save_figure(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _axes(window=None, title: str = ""):
    fig, ax = plt.subplots(figsize=(8.0, 8.0), dpi=100)
    if window is not None:
        ax.set_xlim(window.xmin, window.xmax)
        ax.set_ylim(window.ymin, window.ymax)
    ax.set_aspect("equal", adjustable="box")
    if title:
        ax.set_title(title)
    return fig, ax


def _draw_set(ax, ps, color: str, cloud_color: str | None = None) -> None:
    for pl in ps.polylines:
        ax.plot(pl.points[:, 0], pl.points[:, 1], color=color, lw=0.8)
    if len(ps.cloud):
        ax.scatter(ps.cloud[:, 0], ps.cloud[:, 1],
                   s=np.pi * _CLOUD_PX ** 2, c=cloud_color or color,
                   marker="o", linewidths=0)


def plot_polyline_set(ps, window, path, title: str = "",
                      color: str = "tab:blue") -> None:
    fig, ax = _axes(window, title)
    _draw_set(ax, ps, color)
    save_figure(fig, path)


def plot_valence_heatmap(grid, path, title: str = "valence") -> None:
    """Cell rectangles colored by count; boundary cells get a red edge dot."""
    counts = grid.valence
    vmax = max(1, int(counts.max()))
    cmap = plt.get_cmap("viridis", vmax + 1)
    norm = mcolors.BoundaryNorm(np.arange(-0.5, vmax + 1.5), cmap.N)
    fig, ax = _axes(grid.wwindow, title)
    im = ax.imshow(counts.T, origin="lower", norm=norm, cmap=cmap,
                   extent=(grid.wwindow.xmin, grid.wwindow.xmax,
                           grid.wwindow.ymin, grid.wwindow.ymax),
                   interpolation="nearest", aspect="auto")
    if grid.boundary.any():
        ii, jj = np.nonzero(grid.boundary)
        cx, cy = grid.cell_centers()
        ax.scatter(cx[ii], cy[jj], s=2.0, c="tab:red", linewidths=0)
    fig.colorbar(im, ax=ax, ticks=np.arange(0, vmax + 1), shrink=0.8)
    save_figure(fig, path)


def _subsample(arr: np.ndarray, cap: int = 20000) -> np.ndarray:
    if len(arr) <= cap:
        return arr
    step = int(np.ceil(len(arr) / cap))
    return arr[::step]


def plot_trace_wplane(report, window, path) -> None:
    """Target, partitioning set, sequence images and the end-cut path."""
    fig, ax = _axes(window, "image plane: end cut")
    if report.scan is not None:
        part = report.scan.partition
        for pl in part.polylines:
            ax.plot(pl.points[:, 0], pl.points[:, 1], color="0.7", lw=0.6)
        if len(part.cloud):
            cl = _subsample(part.cloud)
            ax.scatter(cl[:, 0], cl[:, 1], s=np.pi * _CLOUD_PX ** 2,
                       c="0.7", linewidths=0)
    seq = np.asarray(report.sequence, dtype=float).reshape(-1, 2)
    if len(seq):
        ax.scatter(seq[:, 0], seq[:, 1], s=8, c="tab:orange", linewidths=0,
                   label="sequence images")
    if report.end_cut is not None:
        v = report.end_cut.vertices
        ax.plot(v[:, 0], v[:, 1], color="tab:blue", lw=1.2, label="end cut")
    ax.scatter([report.w0[0]], [report.w0[1]], s=40, c="tab:red", marker="*",
               linewidths=0, label="target")
    ax.legend(loc="upper right", fontsize=8)
    save_figure(fig, path)


def plot_trace_zplane(report, path) -> None:
    """Chosen lift (solid) over the other lifts (faint) and escape circles."""
    fig, ax = _axes(None, "domain plane: lifts")
    for lf in report.lifts:
        if lf.lifted is None or lf is report.chosen_lift:
            continue
        v = lf.lifted.vertices
        ax.plot(v[:, 0], v[:, 1], color="0.8", lw=0.6)
    if report.chosen_lift is not None and report.chosen_lift.lifted is not None:
        v = report.chosen_lift.lifted.vertices
        ax.plot(v[:, 0], v[:, 1], color="tab:blue", lw=1.2, label="chosen lift")
        ax.scatter([v[0, 0]], [v[0, 1]], s=16, c="tab:green", linewidths=0)
    theta = np.linspace(0.0, 2.0 * np.pi, 256)
    for m in report.escape_radii:
        ax.plot(m * np.cos(theta), m * np.sin(theta), color="tab:red",
                lw=0.5, ls="--")
    ax.set_aspect("equal", adjustable="datalim")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="upper right", fontsize=8)
    save_figure(fig, path)
