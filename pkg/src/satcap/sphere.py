"""Spherical codes: Tammes packing, covering radius, coverage and hemisphere capacity.

Directions live on the unit sphere; satellite altitude is ignored.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.optimize import minimize

from .capacity import SnrParams, capacity
from .channel import build_channel
from .exceptions import EmptyHemisphere, IncompleteCoverage, OutOfTable, TooFewPoints
from .geometry import ArrayConfig, Direction

DEFAULT_GRID = 100_000


class CoverageMode(enum.Enum):
    PACKING = "packing"
    COVERING = "covering"


# Best known separations d_N (degrees) with the coverage percentages printed next to them.
# Packing: non-overlapping caps, d_N is the cap diameter.
PACKING_TABLE = {
    4: (109.4712206, 0.8386),
    5: (90.0000000, 0.7322),
    6: (90.0000000, 0.8787),
    7: (77.8695421, 0.7775),
    8: (74.8584922, 0.8234),
    9: (70.5287794, 0.8258),
    10: (66.1468220, 0.8101),
    11: (63.4349488, 0.8214),
    12: (63.4349488, 0.8961),
    13: (57.1367031, 0.7914),
    14: (55.6705700, 0.8099),
    15: (53.6578501, 0.8073),
    16: (52.2443957, 0.8171),
    17: (51.0903285, 0.8309),
}
# Covering: overlapping caps reaching every point, d_N is the cap radius.
COVERING_TABLE = {
    4: (70.5287, 1.3333),
    5: (63.4349, 1.3819),
    6: (54.7356, 1.2679),
    7: (51.0265, 1.2986),
    8: (48.1395, 1.3307),
    9: (45.8788, 1.3672),
    10: (42.3078, 1.3023),
    11: (41.4271, 1.3761),
    12: (37.3773, 1.2320),
    13: (37.0685, 1.3135),
    14: (34.9379, 1.2615),
    15: (34.0399, 1.2851),
    16: (32.8988, 1.2829),
    17: (32.0929, 1.2989),
}


def _table(mode):
    mode = CoverageMode(mode) if not isinstance(mode, CoverageMode) else mode
    return mode, PACKING_TABLE if mode is CoverageMode.PACKING else COVERING_TABLE


def known_table(n: int, mode=CoverageMode.PACKING) -> float:
    """Tabulated ``d_N`` in degrees for ``4 <= n <= 17``."""
    mode, table = _table(mode)
    if n not in table:
        raise OutOfTable(f"no tabulated {mode.value} value for n = {n}")
    return table[n][0]


def known_coverage(n: int, mode=CoverageMode.PACKING) -> float:
    """Coverage percentage as printed alongside ``d_N``."""
    mode, table = _table(mode)
    if n not in table:
        raise OutOfTable(f"no tabulated {mode.value} value for n = {n}")
    return table[n][1]


def table_cap_radius(n: int, mode=CoverageMode.PACKING) -> float:
    """Cap radius implied by the table: ``d_N / 2`` for packing, ``d_N`` for covering."""
    mode, _ = _table(mode)
    d = known_table(n, mode)
    return d / 2.0 if mode is CoverageMode.PACKING else d


@dataclass(frozen=True)
class SphericalCode:
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        if pts.shape[0] < 2:
            raise TooFewPoints("a spherical code needs at least 2 points")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValueError("points must be unit vectors")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @classmethod
    def from_vectors(cls, vectors) -> "SphericalCode":
        v = np.asarray(vectors, dtype=float)
        return cls(v / np.linalg.norm(v, axis=1, keepdims=True))

    def rotated(self, rotation) -> "SphericalCode":
        return SphericalCode.from_vectors(self.points @ np.asarray(rotation).T)


@dataclass(frozen=True)
class CoverageReport:
    n: int
    separation_deg: float
    cap_radius_deg: float
    coverage_percentage: float
    mode: CoverageMode


def _pair_cosines(points):
    g = points @ points.T
    iu = np.triu_indices(points.shape[0], 1)
    return np.clip(g[iu], -1.0, 1.0)


def min_pairwise_angle(code: SphericalCode) -> float:
    """Smallest great-circle angle between two distinct code points, degrees."""
    pts = code.points if isinstance(code, SphericalCode) else np.asarray(code, dtype=float)
    if pts.shape[0] < 2:
        raise TooFewPoints("need at least two points")
    return math.degrees(math.acos(float(np.max(_pair_cosines(pts)))))


def coverage_percentage(n: int, cap_radius_deg: float) -> float:
    """Total area of ``n`` caps over the sphere area, overlaps counted repeatedly."""
    if not 0.0 < cap_radius_deg <= 180.0:
        raise ValueError("cap radius must lie in (0, 180] degrees")
    return n * (1.0 - math.cos(math.radians(cap_radius_deg))) / 2.0


def coverage_report(n: int, mode=CoverageMode.PACKING) -> CoverageReport:
    mode, _ = _table(mode)
    r = table_cap_radius(n, mode)
    return CoverageReport(n, known_table(n, mode), r, coverage_percentage(n, r), mode)


def fibonacci_grid(n_points: int) -> np.ndarray:
    """Equal-area Fibonacci lattice of ``n_points`` unit vectors."""
    i = np.arange(n_points, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n_points
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    golden = math.pi * (3.0 - math.sqrt(5.0))
    lon = golden * i
    return np.column_stack([r * np.cos(lon), r * np.sin(lon), z])


# ---------------------------------------------------------------------------
# Packing solver
# ---------------------------------------------------------------------------


def _normalize(x):
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _repel(x, iters, exponents=(2.0, 8.0, 32.0, 128.0)):
    """Projected gradient descent on the Riesz energy with a hardening exponent."""
    n = x.shape[0]
    eye = np.eye(n, dtype=bool)
    per_stage = max(1, iters // len(exponents))
    for s in exponents:
        step = 0.5
        for _ in range(per_stage):
            diff = x[:, None, :] - x[None, :, :]
            dist = np.linalg.norm(diff, axis=2)
            dist[eye] = np.inf
            scaled = dist / dist.min()
            # force on i: sum_j (dmin/d_ij)^(s+1) * (x_i - x_j) / d_ij
            w = scaled ** (-(s + 1)) / dist
            force = np.einsum("ij,ijk->ik", w, diff)
            force -= np.sum(force * x, axis=1, keepdims=True) * x
            fmax = np.max(np.linalg.norm(force, axis=1))
            if fmax == 0:
                break
            x = _normalize(x + (step * dist.min() / fmax) * force)
            step *= 0.995
    return x


def _polish(x):
    """Maximize the minimum pair angle directly: min c s.t. <x_i, x_j> <= c, |x_i| = 1."""
    n = x.shape[0]
    iu, ju = np.triu_indices(n, 1)
    c0 = float(np.max(np.sum(x[iu] * x[ju], axis=1)))
    z0 = np.concatenate([x.ravel(), [c0]])

    def objective(z):
        return z[-1]

    def obj_grad(z):
        g = np.zeros_like(z)
        g[-1] = 1.0
        return g

    def ineq(z):
        p = z[:-1].reshape(n, 3)
        return z[-1] - np.sum(p[iu] * p[ju], axis=1)

    def ineq_jac(z):
        p = z[:-1].reshape(n, 3)
        jac = np.zeros((iu.size, 3 * n + 1))
        rows = np.arange(iu.size)
        for k in range(3):
            jac[rows, 3 * iu + k] = -p[ju, k]
            jac[rows, 3 * ju + k] = -p[iu, k]
        jac[:, -1] = 1.0
        return jac

    def eq(z):
        p = z[:-1].reshape(n, 3)
        return np.sum(p * p, axis=1) - 1.0

    def eq_jac(z):
        p = z[:-1].reshape(n, 3)
        jac = np.zeros((n, 3 * n + 1))
        for k in range(3):
            jac[np.arange(n), 3 * np.arange(n) + k] = 2.0 * p[:, k]
        return jac

    res = minimize(
        objective,
        z0,
        jac=obj_grad,
        method="SLSQP",
        constraints=[
            {"type": "ineq", "fun": ineq, "jac": ineq_jac},
            {"type": "eq", "fun": eq, "jac": eq_jac},
        ],
        options={"maxiter": 500, "ftol": 1e-15},
    )
    y = _normalize(res.x[:-1].reshape(n, 3))
    if not np.all(np.isfinite(y)):
        return x
    return y if np.max(_pair_cosines(y)) < np.max(_pair_cosines(x)) else x


def _pack_once(n, seed, restart, iters):
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(restart,)))
    x = _normalize(rng.standard_normal((n, 3)))
    x = _repel(x, iters)
    return _polish(x)


def solve_packing(n: int, seed: int = 0, restarts: int = 20, iters: int = 400, jobs: int = 1) -> SphericalCode:
    """Best-found Tammes configuration of ``n`` points.

    Each restart runs repulsion dynamics from random points, followed by a
    direct max-min-angle polish. Restart ``r`` uses its own substream of
    ``seed``; the winner is the largest minimum angle, ties going to the
    lowest restart index, so the result does not depend on ``jobs``.
    """
    if n < 2:
        raise TooFewPoints("need at least two points")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if jobs == 1:
        candidates = [_pack_once(n, seed, r, iters) for r in range(restarts)]
    else:
        candidates = Parallel(n_jobs=jobs, prefer="threads")(
            delayed(_pack_once)(n, seed, r, iters) for r in range(restarts)
        )
    scores = [float(np.max(_pair_cosines(c))) for c in candidates]
    best = int(np.argmin(scores))
    return SphericalCode.from_vectors(candidates[best])


# ---------------------------------------------------------------------------
# Covering
# ---------------------------------------------------------------------------


def _nearest_cosines(grid, points, chunk=20_000):
    out = np.empty(grid.shape[0])
    for start in range(0, grid.shape[0], chunk):
        block = grid[start : start + chunk] @ points.T
        out[start : start + chunk] = block.max(axis=1)
    return out


def _hole_depth(u, points):
    u = u / np.linalg.norm(u)
    return math.acos(min(1.0, max(-1.0, float(np.max(points @ u)))))


def _refine_hole(start, points, step):
    frame = receiver_frame(start)
    e1, e2 = frame[0], frame[1]

    def neg_depth(ab):
        return -_hole_depth(start + ab[0] * e1 + ab[1] * e2, points)

    simplex = np.array([[0.0, 0.0], [step, 0.0], [0.0, step]])
    res = minimize(
        neg_depth,
        np.zeros(2),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-13, "maxiter": 2000},
    )
    return -res.fun


def covering_radius(
    code: SphericalCode, grid_resolution: int = DEFAULT_GRID, refine: int = 8
) -> float:
    """Smallest common cap radius (degrees) covering the sphere, estimated on a grid.

    The deepest grid point (largest angle to its nearest code point) gives a
    lower bound within the grid's own covering radius (under half a degree at
    the default resolution). The ``refine`` deepest grid points are then
    polished by a local search for the exact hole, which removes the grid
    error whenever the deepest hole lies next to one of them. The result never
    exceeds the true covering radius.
    """
    if grid_resolution < 1000:
        raise ValueError("grid_resolution must be >= 1000")
    grid = fibonacci_grid(grid_resolution)
    nearest = _nearest_cosines(grid, code.points)
    best = math.acos(min(1.0, max(-1.0, float(nearest.min()))))
    if refine:
        step = 2.0 * math.sqrt(4.0 * math.pi / grid_resolution)
        for i in np.argsort(nearest, kind="stable")[:refine]:
            best = max(best, _refine_hole(grid[i], code.points, step))
    return math.degrees(best)


def cover_counts(code: SphericalCode, cap_radius_deg: float, grid_resolution: int = DEFAULT_GRID) -> np.ndarray:
    """Number of caps containing each grid point."""
    grid = fibonacci_grid(grid_resolution)
    cos_r = math.cos(math.radians(cap_radius_deg))
    counts = np.zeros(grid_resolution, dtype=int)
    for start in range(0, grid_resolution, 20_000):
        block = grid[start : start + 20_000] @ code.points.T
        counts[start : start + 20_000] = np.count_nonzero(block >= cos_r - 1e-12, axis=1)
    return counts


def interference_histogram(
    code: SphericalCode, cap_radius_deg: float, grid_resolution: int = DEFAULT_GRID
) -> dict[int, float]:
    """Area fraction of the sphere seen by exactly ``k`` caps, for each ``k``."""
    counts = cover_counts(code, cap_radius_deg, grid_resolution)
    if np.any(counts == 0):
        raise IncompleteCoverage(
            f"{np.count_nonzero(counts == 0)} grid points uncovered at radius {cap_radius_deg}"
        )
    values, freq = np.unique(counts, return_counts=True)
    return {int(v): float(f) / grid_resolution for v, f in zip(values, freq)}


# ---------------------------------------------------------------------------
# Hemisphere capacity
# ---------------------------------------------------------------------------


def receiver_frame(axis, reference=None) -> np.ndarray:
    """Rows ``(e_x, e_y, e_z)`` of a right-handed frame with ``e_z`` along ``axis``.

    ``reference`` fixes the local +x direction (projected onto the plane
    normal to ``axis``). By default the world x axis is used, or world y
    when x is nearly parallel to ``axis``.
    """
    ez = np.asarray(axis, dtype=float)
    ez = ez / np.linalg.norm(ez)
    if reference is None:
        reference = np.array([1.0, 0.0, 0.0])
        if abs(ez @ reference) > 0.9:
            reference = np.array([0.0, 1.0, 0.0])
    ref = np.asarray(reference, dtype=float)
    ex = ref - (ref @ ez) * ez
    norm = np.linalg.norm(ex)
    if norm < 1e-9:
        raise ValueError("reference must not be parallel to the receiver axis")
    ex = ex / norm
    return np.vstack([ex, np.cross(ez, ex), ez])


def visible_points(code: SphericalCode, receiver_axis) -> np.ndarray:
    """Code points strictly above the receiver's horizon (boundary excluded)."""
    axis = np.asarray(receiver_axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return code.points[code.points @ axis > 0.0]


def hemisphere_capacity(
    code: SphericalCode, receiver_axis, config: ArrayConfig, p, reference=None
) -> float:
    """Capacity when only satellites above the receiver's horizon transmit.

    Points with ``<point, receiver_axis> > 0`` are expressed in the receiver
    frame (:func:`receiver_frame`, zenith along ``receiver_axis``) and fed
    to the linear-array channel. Points exactly on the horizon are excluded.
    """
    vis = visible_points(code, receiver_axis)
    if vis.shape[0] == 0:
        raise EmptyHemisphere("no code point lies in the receiver's open hemisphere")
    local = vis @ receiver_frame(receiver_axis, reference).T
    sats = [Direction.from_vector(v) for v in local]
    return capacity(build_channel(config, sats), SnrParams.coerce(p))


# ---------------------------------------------------------------------------
# Reference solids
# ---------------------------------------------------------------------------


def tetrahedron() -> SphericalCode:
    return SphericalCode.from_vectors([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]])


def octahedron() -> SphericalCode:
    return SphericalCode.from_vectors(np.vstack([np.eye(3), -np.eye(3)]))


def icosahedron() -> SphericalCode:
    g = (1.0 + math.sqrt(5.0)) / 2.0
    v = []
    for a in (-1.0, 1.0):
        for b in (-g, g):
            v += [[0.0, a, b], [a, b, 0.0], [b, 0.0, a]]
    return SphericalCode.from_vectors(v)
