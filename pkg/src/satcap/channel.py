"""Steering channel matrices for linear/rectangular arrays and the Rotman lens."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import EmptyConstellation, LengthMismatch, NonConstantDelaysWithTTD
from .geometry import ArrayConfig, Direction, direction_cosine


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex ``n_r x n_t`` channel (rows: array elements, columns: satellites)."""

    entries: np.ndarray

    def __post_init__(self):
        h = np.array(self.entries, dtype=complex)
        if h.ndim != 2 or 0 in h.shape:
            raise ValueError("channel entries must be a non-empty 2-D array")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    @property
    def n_r(self) -> int:
        return self.entries.shape[0]

    @property
    def n_t(self) -> int:
        return self.entries.shape[1]

    def to_dict(self) -> dict:
        return {
            "n_r": self.n_r,
            "n_t": self.n_t,
            "re": self.entries.real.ravel().tolist(),
            "im": self.entries.imag.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelMatrix":
        shape = (int(data["n_r"]), int(data["n_t"]))
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        if re.size != shape[0] * shape[1] or im.size != re.size:
            raise LengthMismatch("re/im arrays do not match n_r * n_t")
        return cls((re + 1j * im).reshape(shape))


def steering_matrix(nus, n_r: int, kd: float) -> np.ndarray:
    """``exp(j*kd*m*nu_i) / sqrt(n_t*n_r)`` for element ``m = 0..n_r-1``.

    ``nus`` may carry leading batch dimensions; the result has shape
    ``nus.shape[:-1] + (n_r, n_t)``.
    """
    nus = np.asarray(nus, dtype=float)
    n_t = nus.shape[-1]
    m = np.arange(n_r, dtype=float)[:, None]
    phase = kd * m * nus[..., None, :]
    return np.exp(1j * phase) / math.sqrt(n_t * n_r)


def build_channel(config: ArrayConfig, sats: Sequence[Direction]) -> ChannelMatrix:
    """Steering channel for a linear array.

    ``H[m, i] = exp(j k d m nu_i) / sqrt(n_T n_R)`` where the element index
    ``m`` starts at 0 and ``nu_i`` is the direction cosine of satellite ``i``.
    Columns follow the order of ``sats``.
    """
    if len(sats) == 0:
        raise EmptyConstellation("at least one satellite is required")
    nus = [direction_cosine(config.alignment, s) for s in sats]
    return ChannelMatrix(steering_matrix(nus, config.n_elements, config.kd))


def array_factor(config: ArrayConfig, direction: Direction, excitations) -> complex:
    """Weighted element sum ``sum_m I_m exp(j k m d nu)``."""
    excitations = np.asarray(excitations, dtype=complex)
    if excitations.shape != (config.n_elements,):
        raise LengthMismatch(
            f"expected {config.n_elements} excitations, got {excitations.shape}"
        )
    nu = direction_cosine(config.alignment, direction)
    m = np.arange(config.n_elements)
    return complex(np.sum(excitations * np.exp(1j * config.kd * m * nu)))


def build_rectangular_channel(
    config_x: ArrayConfig, config_y: ArrayConfig, sats: Sequence[Direction]
) -> list[ChannelMatrix]:
    """Split an ``m x n`` planar grid into ``m`` linear sub-array channels.

    ``config_x`` describes one row (``n`` elements along its own alignment);
    ``config_y`` gives the row count ``m`` and the row-to-row offset axis.
    Row ``r`` is the row channel with each column multiplied by the phase of
    its offset ``r * d_y``; that factor is a unitary column scaling and leaves
    the per-row capacity unchanged. Capacity of the grid is the sum over rows
    (:func:`satcap.capacity.rectangular_capacity`).
    """
    if not math.isclose(config_x.wavenumber_k, config_y.wavenumber_k, rel_tol=1e-12):
        raise LengthMismatch("sub-array configs must share the wavenumber")
    base = build_channel(config_x, sats)
    nu_y = np.array([direction_cosine(config_y.alignment, s) for s in sats])
    out = []
    for r in range(config_y.n_elements):
        offset = np.exp(1j * config_y.kd * r * nu_y)
        out.append(ChannelMatrix(base.entries * offset[None, :]))
    return out


@dataclass(frozen=True)
class RotmanParams:
    """Rotman lens front end.

    ``phase_delays`` holds the per-beam-port path lengths ``F_m + V_m``.
    With ``ttd`` set they must all be equal (true-time-delay condition); an
    empty list is then read as zero common delay.
    """

    n_beam_ports: int
    n_array_ports: int
    spacing_d: float
    wavenumber_k: float
    w0: float = 0.0
    phase_delays: tuple = field(default_factory=tuple)
    ttd: bool = True

    def __post_init__(self):
        delays = tuple(float(x) for x in self.phase_delays)
        object.__setattr__(self, "phase_delays", delays)
        if self.n_beam_ports < 1 or self.n_array_ports < 1:
            raise ValueError("port counts must be positive")
        if delays and len(delays) != self.n_beam_ports:
            raise LengthMismatch(
                f"expected {self.n_beam_ports} phase delays, got {len(delays)}"
            )
        if self.ttd and delays and any(d != delays[0] for d in delays):
            raise NonConstantDelaysWithTTD("ttd requires equal F_m + V_m for every port")


def rotman_eta(n_array_ports: int, spacing_d: float) -> np.ndarray:
    """Array-port offsets ``(n - (N+1)/2) * d`` for ``n = 1..N``."""
    n = np.arange(1, n_array_ports + 1, dtype=float)
    return (n - (n_array_ports + 1) / 2.0) * spacing_d


def _beam_sines(sats) -> np.ndarray:
    # Directions contribute sin(theta); bare numbers are signed beam angles.
    return np.array(
        [math.sin(s.theta) if isinstance(s, Direction) else math.sin(float(s)) for s in sats]
    )


def rotman_matrix(params: RotmanParams, sats) -> ChannelMatrix:
    """Lens transfer matrix ``S = e^{jkW0}/sqrt(nT nR) * A * D``.

    ``A[n, m] = exp(-j k eta_n sin(theta_m))`` and
    ``D = diag(exp(-j k (F_m + V_m)))``. Under ``ttd`` the diagonal collapses to
    a single common phase. ``sats`` holds either :class:`Direction` objects or
    signed beam angles in radians.
    """
    if len(sats) != params.n_beam_ports:
        raise LengthMismatch(f"expected {params.n_beam_ports} beams, got {len(sats)}")
    k = params.wavenumber_k
    eta = rotman_eta(params.n_array_ports, params.spacing_d)
    a = np.exp(-1j * k * np.outer(eta, _beam_sines(sats)))
    delays = np.asarray(params.phase_delays, dtype=float)
    if params.ttd:
        common = delays[0] if delays.size else 0.0
        s = a * np.exp(-1j * k * common)
    else:
        if delays.size == 0:
            delays = np.zeros(params.n_beam_ports)
        s = a * np.exp(-1j * k * delays)[None, :]
    scale = np.exp(1j * k * params.w0) / math.sqrt(params.n_beam_ports * params.n_array_ports)
    return ChannelMatrix(scale * s)
