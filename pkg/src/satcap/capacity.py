"""Eigenvalue-based capacity, the equal-eigenvalue bound and Monte Carlo statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from joblib import Parallel, delayed

from .channel import ChannelMatrix, RotmanParams, rotman_eta, steering_matrix
from .exceptions import EigenFailure
from .geometry import ArrayConfig, direction_cosines, sample_hemisphere_angles

#: Eigenvalues in (-NEG_EIG_TOL, 0) are treated as round-off and clamped to zero.
NEG_EIG_TOL = 1e-12

#: Samples per random substream in :func:`monte_carlo`.
BLOCK_SIZE = 2048


@dataclass(frozen=True)
class SnrParams:
    """Linear transmit-power to noise ratio ``P / sigma^2``."""

    snr: float

    def __post_init__(self):
        snr = float(self.snr)
        if not (math.isfinite(snr) and snr > 0):
            raise ValueError(f"snr must be finite and positive, got {self.snr!r}")
        object.__setattr__(self, "snr", snr)

    @classmethod
    def coerce(cls, value) -> "SnrParams":
        return value if isinstance(value, cls) else cls(value)

    @classmethod
    def from_db(cls, snr_db: float) -> "SnrParams":
        return cls(10.0 ** (snr_db / 10.0))


@dataclass(frozen=True)
class CapacityStats:
    mean: float
    second_moment: float
    samples: int
    outage: tuple = field(default_factory=tuple)

    @property
    def variance(self) -> float:
        return max(self.second_moment - self.mean**2, 0.0)

    @classmethod
    def from_samples(cls, capacities, thresholds=()) -> "CapacityStats":
        c = np.asarray(capacities, dtype=float)
        n = c.size
        outage = tuple((float(t), float(np.count_nonzero(c < t)) / n) for t in thresholds)
        return cls(float(np.sum(c) / n), float(np.sum(c * c) / n), n, outage)

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "second_moment": self.second_moment,
            "variance": self.variance,
            "samples": self.samples,
            "outage": [{"threshold": t, "probability": p} for t, p in self.outage],
        }

    def to_rows(self) -> list[tuple[str, float]]:
        """``(statistic, value)`` pairs for CSV output."""
        rows = [
            ("mean", self.mean),
            ("second_moment", self.second_moment),
            ("variance", self.variance),
            ("samples", self.samples),
        ]
        rows += [(f"outage@{t:.9g}", p) for t, p in self.outage]
        return rows


def gram(h: ChannelMatrix) -> np.ndarray:
    """The smaller Gram matrix: ``H^H H`` if ``n_t <= n_r``, else ``H H^H``."""
    entries = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h)
    return _gram(entries)


def _gram(h: np.ndarray) -> np.ndarray:
    hc = np.conj(np.swapaxes(h, -1, -2))
    if h.shape[-1] <= h.shape[-2]:
        return hc @ h
    return h @ hc


def gram_eigenvalues(w: np.ndarray) -> np.ndarray:
    """Eigenvalues (ascending) of a Hermitian PSD matrix or stack of matrices.

    Round-off negatives above ``-NEG_EIG_TOL`` are clamped to zero; anything
    more negative, or a solver failure, raises :class:`EigenFailure`.
    """
    if not np.all(np.isfinite(w)):
        raise EigenFailure("non-finite matrix entry")
    try:
        lam = np.linalg.eigvalsh(w)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(lam)):
        raise EigenFailure("non-finite eigenvalue")
    if lam.size and lam.min() < -NEG_EIG_TOL:
        raise EigenFailure(f"negative eigenvalue {lam.min():.3e}")
    return np.maximum(lam, 0.0)


def capacity(h: ChannelMatrix, p) -> float:
    """``sum_i log2(1 + snr * lambda_i)`` over the Gram eigenvalues, bits/s/Hz."""
    snr = SnrParams.coerce(p).snr
    lam = gram_eigenvalues(gram(h))
    return float(np.sum(np.log2(1.0 + snr * lam)))


def capacity_upper_bound(n_min: int, p) -> float:
    """Largest achievable capacity with unit-trace Gram of rank ``n_min``.

    By AM-GM, ``prod(1 + snr*lam_i) <= (1 + snr/n)^n`` when ``sum lam_i = 1``,
    hence ``C <= n log2(1 + snr/n)``, with equality iff all eigenvalues equal.
    """
    if n_min < 1:
        raise ValueError("n_min must be positive")
    snr = SnrParams.coerce(p).snr
    return n_min * math.log1p(snr / n_min) / math.log(2.0)


def printed_bound(n_t: int, p) -> float:
    """``log2(n_t + snr)``: the bound as it appears in print, kept for the errata report.

    It does not hold; the equal-eigenvalue optimum exceeds it for ``n_t >= 2``.
    """
    return math.log2(n_t + SnrParams.coerce(p).snr)


def rectangular_capacity(channels: Sequence[ChannelMatrix], p) -> float:
    """Total capacity of independently analysed sub-arrays."""
    return float(sum(capacity(h, p) for h in channels))


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Random stream for sample block ``block``.

    Every block gets ``SeedSequence(seed, spawn_key=(block,))``, so the sample
    stream does not depend on how blocks are distributed over workers.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(block,)))


def _batch_capacity(h: np.ndarray, snr: float, first_index: int) -> np.ndarray:
    try:
        lam = gram_eigenvalues(_gram(h))
    except EigenFailure:
        for i in range(h.shape[0]):
            try:
                gram_eigenvalues(_gram(h[i]))
            except EigenFailure as exc:
                raise EigenFailure(f"sample {first_index + i}: {exc}", first_index + i) from exc
        raise
    return np.sum(np.log2(1.0 + snr * lam), axis=-1)


def _run_blocks(
    draw: Callable[[np.random.Generator, int], np.ndarray],
    snr: float,
    n_samples: int,
    seed: int,
    jobs: int,
) -> np.ndarray:
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n_blocks = -(-n_samples // BLOCK_SIZE)

    def one(b):
        size = min(BLOCK_SIZE, n_samples - b * BLOCK_SIZE)
        h = draw(block_rng(seed, b), size)
        return _batch_capacity(h, snr, b * BLOCK_SIZE)

    if jobs == 1:
        parts = [one(b) for b in range(n_blocks)]
    else:
        parts = Parallel(n_jobs=jobs, prefer="threads")(delayed(one)(b) for b in range(n_blocks))
    return np.concatenate(parts)


def sample_capacities(config: ArrayConfig, n_sats: int, p, n_samples: int, seed: int = 0, jobs: int = 1):
    """Capacities of ``n_samples`` random constellations (hemisphere-uniform satellites)."""
    snr = SnrParams.coerce(p).snr

    def draw(rng, size):
        theta, phi = sample_hemisphere_angles(rng, (size, n_sats))
        nus = direction_cosines(config.alignment, theta, phi)
        return steering_matrix(nus, config.n_elements, config.kd)

    return _run_blocks(draw, snr, n_samples, seed, jobs)


def monte_carlo(
    config: ArrayConfig,
    n_sats: int,
    p,
    n_samples: int,
    thresholds: Sequence[float] = (),
    seed: int = 0,
    jobs: int = 1,
) -> CapacityStats:
    """Mean, second moment and empirical outage ``P(C < t)`` over random constellations.

    The result is bit-identical for a given seed regardless of ``jobs``.
    """
    caps = sample_capacities(config, n_sats, p, n_samples, seed, jobs)
    return CapacityStats.from_samples(caps, thresholds)


def rotman_sample_capacities(params: RotmanParams, p, n_samples: int, seed: int = 0, jobs: int = 1):
    """Capacities with lens beam angles drawn uniformly from (0, pi/2)."""
    snr = SnrParams.coerce(p).snr
    k = params.wavenumber_k
    eta = rotman_eta(params.n_array_ports, params.spacing_d)
    delays = np.asarray(params.phase_delays, dtype=float)
    if params.ttd or delays.size == 0:
        port_phase = np.ones(params.n_beam_ports, dtype=complex)
    else:
        port_phase = np.exp(-1j * k * delays)
    # common phases (W0, ttd delay) do not change the Gram matrix
    scale = 1.0 / math.sqrt(params.n_beam_ports * params.n_array_ports)

    def draw(rng, size):
        theta = 0.5 * np.pi * rng.random((size, params.n_beam_ports))
        a = np.exp(-1j * k * eta[None, :, None] * np.sin(theta)[:, None, :])
        return scale * a * port_phase

    return _run_blocks(draw, snr, n_samples, seed, jobs)


def rotman_monte_carlo(
    params: RotmanParams, p, n_samples: int, thresholds: Sequence[float] = (), seed: int = 0, jobs: int = 1
) -> CapacityStats:
    caps = rotman_sample_capacities(params, p, n_samples, seed, jobs)
    return CapacityStats.from_samples(caps, thresholds)
