"""Angular coordinates, direction cosines and random direction sampling.

Convention: ``theta`` is the polar angle measured from +Z, ``phi`` the azimuth
measured from +X in the XY plane. All angles are radians.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InfeasibleNu

#: Relative slack on the ``kd >= pi`` requirement, so that pi typed to 9 digits is accepted.
KD_RTOL = 1e-8


def wrap_azimuth(phi):
    """Map an azimuth (scalar or array) into (-pi, pi]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), 2.0 * np.pi)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


@dataclass(frozen=True)
class Direction:
    """Satellite position seen from the receiver."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not (0.0 <= theta <= math.pi) or not math.isfinite(theta):
            raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", wrap_azimuth(float(self.phi)))

    @classmethod
    def from_vector(cls, v) -> "Direction":
        x, y, z = np.asarray(v, dtype=float) / np.linalg.norm(v)
        return cls(math.acos(min(1.0, max(-1.0, z))), math.atan2(y, x))

    def to_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


class ArrayAlignment(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"

    @classmethod
    def coerce(cls, value) -> "ArrayAlignment":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform linear array at the receiver.

    Elements sit at ``m * spacing_d`` along ``alignment`` for
    ``m = 0 .. n_elements - 1``. ``wavenumber_k * spacing_d`` must be at least
    pi (spacing of half a wavelength or more).
    """

    n_elements: int
    spacing_d: float
    wavenumber_k: float
    alignment: ArrayAlignment = ArrayAlignment.Y

    def __post_init__(self):
        if int(self.n_elements) != self.n_elements or self.n_elements < 1:
            raise ValueError("n_elements must be a positive integer")
        if not self.spacing_d > 0 or not self.wavenumber_k > 0:
            raise ValueError("spacing_d and wavenumber_k must be positive")
        if self.wavenumber_k * self.spacing_d < math.pi * (1 - KD_RTOL):
            raise ValueError("wavenumber_k * spacing_d must be >= pi")
        object.__setattr__(self, "n_elements", int(self.n_elements))
        object.__setattr__(self, "alignment", ArrayAlignment.coerce(self.alignment))

    @property
    def kd(self) -> float:
        return self.wavenumber_k * self.spacing_d

    @classmethod
    def from_kd(cls, n_elements, kd, alignment=ArrayAlignment.Y, wavelength=1.0):
        """Build a config from the product ``k*d`` for a given wavelength."""
        k = 2.0 * math.pi / wavelength
        return cls(n_elements, kd / k, k, alignment)


def direction_cosines(alignment, theta, phi):
    """Vectorized direction cosine for arrays of angles."""
    alignment = ArrayAlignment.coerce(alignment)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if alignment is ArrayAlignment.Y:
        return np.sin(theta) * np.sin(phi)
    if alignment is ArrayAlignment.X:
        return np.cos(theta) * np.sin(phi)
    return np.cos(theta) + 0.0 * phi


def direction_cosine(alignment, direction: Direction) -> float:
    """Projection ``nu`` of a direction onto the array axis.

    Y: sin(theta) sin(phi); X: cos(theta) sin(phi); Z: cos(theta).
    """
    alignment = ArrayAlignment.coerce(alignment)
    if alignment is ArrayAlignment.Y:
        nu = math.sin(direction.theta) * math.sin(direction.phi)
    elif alignment is ArrayAlignment.X:
        nu = math.cos(direction.theta) * math.sin(direction.phi)
    else:
        nu = math.cos(direction.theta)
    return min(1.0, max(-1.0, nu))


def recover_direction(nu: float, alignment, fixed_theta: float = math.pi / 2) -> Direction:
    """Find a direction whose direction cosine equals ``nu``.

    For X/Y arrays the polar angle is held at ``fixed_theta`` and the azimuth
    is solved on the principal arcsin branch. For Z arrays ``fixed_theta`` is
    ignored and ``theta = arccos(nu)``, ``phi = 0``.

    Raises
    ------
    InfeasibleNu
        If ``|nu|`` exceeds the factor (sin or cos of ``fixed_theta``) that
        multiplies ``sin(phi)``.
    """
    alignment = ArrayAlignment.coerce(alignment)
    nu = float(nu)
    if abs(nu) > 1.0:
        raise InfeasibleNu(f"|nu| = {abs(nu)!r} exceeds 1")
    if alignment is ArrayAlignment.Z:
        return Direction(math.acos(nu), 0.0)
    factor = math.sin(fixed_theta) if alignment is ArrayAlignment.Y else math.cos(fixed_theta)
    if factor == 0.0:
        if nu == 0.0:
            return Direction(fixed_theta, 0.0)
        raise InfeasibleNu(f"nu = {nu!r} is not realizable with theta = {fixed_theta!r}")
    ratio = nu / factor
    if abs(ratio) > 1.0:
        # tolerate rounding on the boundary
        if abs(ratio) - 1.0 > 1e-12:
            raise InfeasibleNu(
                f"nu = {nu!r} is not realizable with theta = {fixed_theta!r} "
                f"(|nu / factor| = {abs(ratio):.6g})"
            )
        ratio = math.copysign(1.0, ratio)
    return Direction(fixed_theta, math.asin(ratio))


def sample_hemisphere_angles(rng: np.random.Generator, size=None):
    """Draw ``(theta, phi)`` arrays, area-uniform on the upper hemisphere.

    ``cos(theta) ~ U[0, 1)`` and ``phi ~ U(-pi, pi]``.
    """
    cos_theta = rng.random(size)
    phi = np.pi - 2.0 * np.pi * rng.random(size)
    return np.arccos(cos_theta), phi


def sample_hemisphere(rng: np.random.Generator) -> Direction:
    """Draw one direction uniformly (by area) from the upper hemisphere."""
    theta, phi = sample_hemisphere_angles(rng)
    return Direction(float(theta), float(phi))
