"""Planar maps f = (u, v) and their first-order (Wirtinger) data.

A :class:`PlanarMap` pairs two expressions in ``x`` and ``y``.  From the
four partials the complex derivatives are

    fz    = ((u_x + v_y) + i (v_x - u_y)) / 2
    fzbar = ((u_x - v_y) + i (v_x + u_y)) / 2

and the derived quantities: ``jacobian = |fz|^2 - |fzbar|^2`` (equal to
``u_x v_y - u_y v_x``), ``big_lambda = |fz| + |fzbar|`` (largest stretch),
``small_lambda = ||fz| - |fzbar||`` (smallest stretch), and the second
complex dilatation ``mu = fzbar / fz``, reported as ``None`` when ``fz`` is
numerically zero.  The map is sense-preserving at a point exactly when the
jacobian is positive there, equivalently ``|mu| < 1`` where defined.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .expr import Expression, Neg, eval_dual, eval_dual_grid, eval_grid, parse

__all__ = [
    "Point",
    "Disk",
    "PlanarMap",
    "WirtingerData",
    "planar_map",
    "evaluate",
    "wirtinger",
    "builtin",
    "builtin_names",
    "conjugate_map",
    "evaluate_grid",
    "wirtinger_grid",
    "jacobian_grid",
    "MU_FZ_FLOOR",
]

# fz is treated as zero (mu undefined) below this relative floor
MU_FZ_FLOOR = 1e-14


class Point(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and np.isfinite(self.radius)):
            raise ValueError(f"disk radius must be positive and finite, got {self.radius}")


@dataclass(frozen=True)
class PlanarMap:
    """A C1 map of the plane given by component expressions u and v."""

    name: str
    u: Expression
    v: Expression


@dataclass(frozen=True)
class WirtingerData:
    fz: complex
    fzbar: complex
    jacobian: float
    big_lambda: float
    small_lambda: float
    mu: Optional[complex]

    @property
    def sense_preserving(self) -> bool:
        return self.jacobian > 0.0


def planar_map(u_text: str, v_text: str, name: str = "user") -> PlanarMap:
    """Build a map from component formulas."""
    return PlanarMap(name, parse(u_text), parse(v_text))


def evaluate(map: PlanarMap, z: Point) -> Point:
    """Checked evaluation of f at a point (faults raise DomainFault)."""
    u = eval_dual(map.u, z[0], z[1])
    v = eval_dual(map.v, z[0], z[1])
    return Point(u.value, v.value)


def wirtinger(map: PlanarMap, z: Point) -> WirtingerData:
    """Checked first-order data of f at a point."""
    u = eval_dual(map.u, z[0], z[1])
    v = eval_dual(map.v, z[0], z[1])
    return _wirtinger_from_partials(u.dx, u.dy, v.dx, v.dy)


def _wirtinger_from_partials(ux: float, uy: float, vx: float, vy: float) -> WirtingerData:
    fz = complex(0.5 * (ux + vy), 0.5 * (vx - uy))
    fzbar = complex(0.5 * (ux - vy), 0.5 * (vx + uy))
    afz = abs(fz)
    afzbar = abs(fzbar)
    jacobian = afz * afz - afzbar * afzbar
    mu = None if afz <= MU_FZ_FLOOR * (1.0 + afzbar) else fzbar / fz
    return WirtingerData(fz, fzbar, jacobian, afz + afzbar, abs(afz - afzbar), mu)


# ---------------------------------------------------------------------------
# Vectorized helpers (unchecked; non-finite entries possible)


def evaluate_grid(map: PlanarMap, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values (u, v) on arrays of points."""
    return eval_grid(map.u, x, y), eval_grid(map.v, x, y)


def wirtinger_grid(
    map: PlanarMap, x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Values and partials (u, v, ux, uy, vx, vy) on arrays of points."""
    u, ux, uy = eval_dual_grid(map.u, x, y)
    v, vx, vy = eval_dual_grid(map.v, x, y)
    return u, v, ux, uy, vx, vy


def jacobian_grid(map: PlanarMap, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """u_x v_y - u_y v_x on arrays of points."""
    _, ux, uy = eval_dual_grid(map.u, x, y)
    _, vx, vy = eval_dual_grid(map.v, x, y)
    return ux * vy - uy * vx


# ---------------------------------------------------------------------------
# Builtin corpus

_BUILTINS: dict[str, tuple[str, str]] = {
    # exp(z) real part paired with half the imaginary part of z^2
    "ex1-nono": ("exp(x)*cos(y)", "x*y"),
    # exp(z) plus i times the imaginary part of z
    "ex2-bloch": ("exp(x)*cos(y)", "exp(x)*sin(y) + y"),
    # z plus the real part of exp(z)
    "ex3-zplusre": ("x + exp(x)*cos(y)", "y"),
    # twice (real part of z^3 plus i z)
    "ex4-cubic": ("2*(x^3 - 3*x*y^2) - 2*y", "2*x"),
    # twice (real part of z^2 plus i (x - y))
    "ex5-quadline": ("2*(x^2 - y^2)", "2*(x - y)"),
    # imaginary part of exp(z^2) plus i times the imaginary part of z^2
    "ex6-imexp": ("exp(x^2 - y^2)*sin(2*x*y)", "2*x*y"),
    "identity": ("x", "y"),
    "zsquared": ("x^2 - y^2", "2*x*y"),
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def builtin(name: str) -> PlanarMap:
    """Return a map from the builtin example corpus by name."""
    try:
        u_text, v_text = _BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin map {name!r}; choose from {builtin_names()}") from None
    return planar_map(u_text, v_text, name=name)


def conjugate_map(map: PlanarMap) -> PlanarMap:
    """The post-conjugated map (u, -v); flips the jacobian sign everywhere."""
    return PlanarMap(f"{map.name}-conj", map.u, Expression(Neg(map.v.ast)))
