"""scikit-learn style wrappers around the functional API.

These follow the usual estimator contract (constructor stores parameters
verbatim, ``fit`` returns ``self``, learned state ends with ``_``) so they can
be used with ``clone``, ``get_params`` and pipelines.
"""
from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import capacity as cap
from .channel import ChannelMatrix, steering_matrix
from .geometry import ArrayAlignment, ArrayConfig, direction_cosines
from .sphere import covering_radius, min_pairwise_angle, solve_packing


class SteeringChannel(TransformerMixin, BaseEstimator):
    """Map a constellation of ``(theta, phi)`` rows to its steering channel.

    Parameters
    ----------
    n_elements : int
        Array element count (``n_R``).
    kd : float
        Product of wavenumber and element spacing, radians.
    alignment : {"x", "y", "z"}
        Array axis.
    """

    def __init__(self, n_elements=4, kd=math.pi, alignment="y"):
        self.n_elements = n_elements
        self.kd = kd
        self.alignment = alignment

    def fit(self, X=None, y=None):
        self.config_ = ArrayConfig.from_kd(self.n_elements, self.kd, ArrayAlignment.coerce(self.alignment))
        if X is not None:
            self.n_features_in_ = check_array(X).shape[1]
        return self

    def transform(self, X):
        """Return the ``n_R x n_T`` channel for angle rows ``X`` of shape ``(n_T, 2)``."""
        check_is_fitted(self, "config_")
        X = check_array(X)
        if X.shape[1] != 2:
            raise ValueError("X must have columns (theta, phi)")
        nus = direction_cosines(self.config_.alignment, X[:, 0], X[:, 1])
        return steering_matrix(nus, self.config_.n_elements, self.config_.kd)

    def score(self, X, y=None, snr=10.0):
        """Capacity of the constellation ``X`` in bits/s/Hz."""
        return cap.capacity(ChannelMatrix(self.transform(X)), snr)


class TammesPacker(BaseEstimator):
    """Spherical code maximizing the minimum pairwise angle.

    After ``fit`` the code points act like cluster centres: ``predict``
    assigns unit vectors to the nearest cap and ``transform`` gives angular
    distances (degrees) to every centre.
    """

    def __init__(self, n_points=12, restarts=20, iters=400, random_state=0, n_jobs=1):
        self.n_points = n_points
        self.restarts = restarts
        self.iters = iters
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        seed = 0 if self.random_state is None else int(self.random_state)
        self.code_ = solve_packing(self.n_points, seed, self.restarts, self.iters, self.n_jobs)
        self.cluster_centers_ = self.code_.points
        self.min_angle_ = min_pairwise_angle(self.code_)
        return self

    def transform(self, X):
        check_is_fitted(self, "code_")
        X = check_array(X)
        X = X / np.linalg.norm(X, axis=1, keepdims=True)
        return np.degrees(np.arccos(np.clip(X @ self.cluster_centers_.T, -1.0, 1.0)))

    def predict(self, X):
        return np.argmin(self.transform(X), axis=1)

    def covering_radius(self, grid_resolution=100_000):
        check_is_fitted(self, "code_")
        return covering_radius(self.code_, grid_resolution)


class CapacityMonteCarlo(BaseEstimator):
    """Monte Carlo capacity statistics for randomly placed satellites.

    ``fit`` draws ``n_samples`` constellations and stores ``stats_``
    (:class:`satcap.capacity.CapacityStats`) plus the raw ``capacities_``.
    ``predict(thresholds)`` returns the empirical outage probabilities.
    """

    def __init__(self, n_sats=4, n_elements=4, kd=math.pi, alignment="y", snr=10.0,
                 n_samples=10_000, random_state=0, n_jobs=1):
        self.n_sats = n_sats
        self.n_elements = n_elements
        self.kd = kd
        self.alignment = alignment
        self.snr = snr
        self.n_samples = n_samples
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        config = ArrayConfig.from_kd(self.n_elements, self.kd, ArrayAlignment.coerce(self.alignment))
        seed = 0 if self.random_state is None else int(self.random_state)
        self.capacities_ = cap.sample_capacities(
            config, self.n_sats, self.snr, self.n_samples, seed, self.n_jobs
        )
        self.stats_ = cap.CapacityStats.from_samples(self.capacities_)
        self.bound_ = cap.capacity_upper_bound(min(self.n_sats, self.n_elements), self.snr)
        return self

    def predict(self, thresholds):
        check_is_fitted(self, "capacities_")
        t = np.asarray(thresholds, dtype=float)
        return np.mean(self.capacities_[:, None] < t.ravel()[None, :], axis=0).reshape(t.shape)
