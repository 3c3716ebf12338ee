"""Capacity-maximizing satellite placements on a linear array.

The capacity bound is met when every Gram eigenvalue equals ``1/n_min``,
i.e. when the steering columns (or rows) are mutually orthogonal. That
happens when the phases ``kd * nu_i`` sit on an evenly spaced grid of the unit
circle.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import InfeasibleNu, KdTooSmall, Mu0OutOfRange
from .geometry import KD_RTOL, ArrayAlignment, Direction, recover_direction

_TOL = 1e-12


class PlacementCase(enum.Enum):
    SQUARE = "square"  # n_T == n_R
    TALL_H = "tall"  # n_T < n_R
    WIDE_H = "wide"  # n_T > n_R


@dataclass(frozen=True)
class OptimalPlacement:
    nus: tuple
    mu0: float
    kd: float
    case: PlacementCase

    def __post_init__(self):
        nus = np.asarray(self.nus, dtype=float)
        if np.any(np.abs(self.kd * nus) > math.pi * (1 + _TOL)):
            raise ValueError("kd * nu must lie in [-pi, pi]")
        if np.any(np.diff(nus) <= 0):
            raise ValueError("nus must be strictly increasing")
        object.__setattr__(self, "nus", tuple(float(v) for v in nus))

    @property
    def n(self) -> int:
        return len(self.nus)


def mu0_interval(n: int) -> tuple[float, float]:
    """Legal offsets ``[-2pi/n - pi, -pi]`` for an ``n``-point grid."""
    return (-2.0 * math.pi / n - math.pi, -math.pi)


def phase_grid(n: int, kd: float, mu0: float) -> np.ndarray:
    """``nu_i = (2 pi i / n + mu0) / kd`` for ``i = 1..n``."""
    i = np.arange(1, n + 1, dtype=float)
    return (2.0 * math.pi * i / n + mu0) / kd


def optimal_nus(
    n_t: int,
    n_r: int,
    kd: float,
    mu0: float | None = None,
    indices: Sequence[int] | None = None,
) -> OptimalPlacement:
    """Direction cosines that make the Gram matrix ``I / min(n_t, n_r)``.

    A grid of ``n = max(n_t, n_r)`` evenly spaced phases is built. When
    ``n_t < n_r`` only ``n_t`` of the ``n_r`` grid points are used; any subset
    works and ``indices`` (0-based into the grid) chooses it, defaulting to the
    first ``n_t``. When ``n_t >= n_r`` the whole grid is used.

    ``mu0`` defaults to the midpoint of its legal interval, which centres the
    grid on zero.
    """
    if n_t < 1 or n_r < 1:
        raise ValueError("n_t and n_r must be positive")
    if kd < math.pi * (1 - KD_RTOL):
        raise KdTooSmall(f"kd = {kd!r} < pi; direction cosines may be unrealizable")
    n = max(n_t, n_r)
    lo, hi = mu0_interval(n)
    if mu0 is None:
        mu0 = 0.5 * (lo + hi)
    elif not (lo - _TOL * abs(lo) <= mu0 <= hi + _TOL * abs(hi)):
        raise Mu0OutOfRange(f"mu0 = {mu0!r} outside [{lo!r}, {hi!r}]")
    grid = phase_grid(n, kd, mu0)

    if n_t == n_r:
        case = PlacementCase.SQUARE
    elif n_t < n_r:
        case = PlacementCase.TALL_H
    else:
        case = PlacementCase.WIDE_H

    if n_t < n_r:
        if indices is None:
            indices = range(n_t)
        idx = sorted(int(i) for i in indices)
        if len(idx) != n_t or len(set(idx)) != n_t or idx[0] < 0 or idx[-1] >= n:
            raise ValueError(f"indices must be {n_t} distinct grid positions in [0, {n})")
        grid = grid[idx]
    return OptimalPlacement(tuple(grid), float(mu0), float(kd), case)


def realize_constellation(
    placement: OptimalPlacement, alignment, fixed_theta: float = math.pi / 2
) -> list[Direction]:
    """Turn direction cosines into satellite directions with a common polar angle."""
    alignment = ArrayAlignment.coerce(alignment)
    out = []
    for i, nu in enumerate(placement.nus):
        try:
            out.append(recover_direction(nu, alignment, fixed_theta))
        except InfeasibleNu as exc:
            raise InfeasibleNu(f"satellite {i}: {exc}", index=i) from exc
    return out


def off_diagonal_norm(w) -> float:
    """Largest off-diagonal magnitude of a square matrix."""
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("square matrix required")
    if w.shape[0] < 2:
        return 0.0
    mask = ~np.eye(w.shape[0], dtype=bool)
    return float(np.max(np.abs(w[mask])))
