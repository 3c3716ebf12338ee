import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import capacity_direct, hermitian_eigs_closed_form
from satcap.capacity import (
    CapacityStats,
    SnrParams,
    block_rng,
    capacity,
    capacity_upper_bound,
    gram,
    gram_eigenvalues,
    monte_carlo,
    printed_bound,
    rotman_monte_carlo,
)
from satcap.channel import ChannelMatrix, RotmanParams, build_channel, steering_matrix
from satcap.exceptions import EigenFailure
from satcap.geometry import ArrayConfig, Direction, recover_direction

LOG2_11 = math.log2(11)


def channel_from_nus(nus, n_r, kd=math.pi):
    return ChannelMatrix(steering_matrix(nus, n_r, kd))


def random_channel(rng, n_r, n_t):
    return channel_from_nus(rng.uniform(-1, 1, n_t), n_r, rng.uniform(math.pi, 3 * math.pi))


def test_snr_params_validation():
    with pytest.raises(ValueError):
        SnrParams(0.0)
    with pytest.raises(ValueError):
        SnrParams(float("inf"))
    assert SnrParams.from_db(10).snr == pytest.approx(10.0)


def test_gram_examples():
    w = gram(channel_from_nus([-0.75, -0.25, 0.25, 0.75], 4))
    np.testing.assert_allclose(w, np.eye(4) / 4, atol=1e-12)
    np.testing.assert_allclose(gram(channel_from_nus([0.3], 5)), [[1.0]], atol=1e-15)
    lam = gram_eigenvalues(gram(channel_from_nus([0.2, 0.2], 3)))
    np.testing.assert_allclose(lam, [0.0, 1.0], atol=1e-12)


def test_gram_picks_smaller_side(rng):
    assert gram(random_channel(rng, 5, 2)).shape == (2, 2)
    assert gram(random_channel(rng, 2, 5)).shape == (2, 2)


def test_capacity_examples():
    assert capacity(channel_from_nus([0.4], 1), 10) == pytest.approx(LOG2_11, abs=1e-12)
    assert LOG2_11 == pytest.approx(3.4594, abs=1e-4)
    c = capacity(channel_from_nus([-0.75, -0.25, 0.25, 0.75], 4), SnrParams(10))
    assert c == pytest.approx(4 * math.log2(3.5), abs=1e-12)
    assert c == pytest.approx(7.2294, abs=1e-4)
    assert capacity(channel_from_nus([0.1, 0.1], 2), 10) == pytest.approx(LOG2_11, abs=1e-12)


def test_capacity_matches_log_det(rng):
    for _ in range(200):
        n_r, n_t = (int(v) for v in rng.integers(1, 7, 2))
        h = random_channel(rng, n_r, n_t)
        assert capacity(h, 7.5) == pytest.approx(capacity_direct(h.entries, 7.5), abs=1e-9)


def test_upper_bound_examples():
    assert capacity_upper_bound(4, 10) == pytest.approx(7.2294, abs=1e-4)
    assert capacity_upper_bound(1, 10) == pytest.approx(LOG2_11, abs=1e-14)
    snr = 1e-6
    assert capacity_upper_bound(4, snr) == pytest.approx(snr / math.log(2), rel=1e-9)


def test_printed_bound_is_violated_by_optimum():
    assert printed_bound(4, 10) == pytest.approx(math.log2(14))
    assert capacity_upper_bound(4, 10) > printed_bound(4, 10)


def test_negative_eigenvalue_raises():
    with pytest.raises(EigenFailure):
        gram_eigenvalues(np.diag([0.5, -1e-6]))
    np.testing.assert_array_equal(gram_eigenvalues(np.diag([-1e-14, 1.0])), [0.0, 1.0])
    with pytest.raises(EigenFailure):
        gram_eigenvalues(np.array([[np.nan, 0], [0, 1.0]]))


def test_bound_over_random_constellations(rng):
    for _ in range(10_000):
        n_r, n_t = (int(v) for v in rng.integers(1, 7, 2))
        snr = float(rng.uniform(0.1, 100))
        c = capacity(random_channel(rng, n_r, n_t), snr)
        assert 0.0 <= c <= capacity_upper_bound(min(n_r, n_t), snr) + 1e-9


@settings(max_examples=100)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_permutation_invariance(n_r, n_t, seed):
    r = np.random.default_rng(seed)
    nus = r.uniform(-1, 1, n_t)
    perm = r.permutation(n_t)
    a = capacity(channel_from_nus(nus, n_r), 10)
    b = capacity(channel_from_nus(nus[perm], n_r), 10)
    assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=100)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_gram_side_invariance(n_r, n_t, seed):
    h = random_channel(np.random.default_rng(seed), n_r, n_t).entries
    lam_a = gram_eigenvalues(h.conj().T @ h)
    lam_b = gram_eigenvalues(h @ h.conj().T)
    ca = float(np.sum(np.log2(1 + 10 * lam_a)))
    cb = float(np.sum(np.log2(1 + 10 * lam_b)))
    assert ca == pytest.approx(cb, abs=1e-10)


def test_capacity_strictly_increases_with_snr(rng):
    h = channel_from_nus([-0.75, -0.25, 0.25, 0.75], 4)
    values = [capacity(h, s) for s in (0.1, 1, 10, 100, 1000)]
    assert all(b > a for a, b in zip(values, values[1:]))
    h2 = random_channel(rng, 3, 3)
    assert np.linalg.matrix_rank(h2.entries) == 3
    assert capacity(h2, 2.0) < capacity(h2, 2.0001)


@pytest.mark.parametrize("n", [2, 3])
def test_eigenvalues_match_characteristic_polynomial(rng, n):
    for _ in range(500):
        w = gram(random_channel(rng, int(rng.integers(n, 7)), n))
        np.testing.assert_allclose(gram_eigenvalues(w), hermitian_eigs_closed_form(w), atol=1e-9)


# -- Monte Carlo ------------------------------------------------------------

CFG = ArrayConfig.from_kd(4, math.pi)


def test_block_rng_is_keyed_by_block():
    a = block_rng(3, 0).random(4)
    assert np.array_equal(a, block_rng(3, 0).random(4))
    assert not np.array_equal(a, block_rng(3, 1).random(4))


def test_monte_carlo_outage_at_zero_and_determinism():
    s1 = monte_carlo(CFG, 4, 10, 3000, (0.0, 3.0, 6.0, 99.0), seed=11)
    s2 = monte_carlo(CFG, 4, 10, 3000, (0.0, 3.0, 6.0, 99.0), seed=11)
    assert s1 == s2
    probs = [p for _, p in s1.outage]
    assert probs[0] == 0.0 and probs[-1] == 1.0
    assert probs == sorted(probs)
    assert s1.variance >= 0


def test_monte_carlo_independent_of_jobs():
    a = monte_carlo(CFG, 3, 10, 9000, (4.0,), seed=5, jobs=1)
    b = monte_carlo(CFG, 3, 10, 9000, (4.0,), seed=5, jobs=4)
    assert a == b


def test_monte_carlo_regression_value():
    s = monte_carlo(CFG, 4, 10, 100_000, (0.0,), seed=0)
    assert 0 < s.mean < capacity_upper_bound(4, 10)
    # first-run values for this seed
    assert s.mean == pytest.approx(5.948549083501826, rel=1e-10)
    assert s.second_moment == pytest.approx(35.69107012226424, rel=1e-10)
    assert s.samples == 100_000


def test_monte_carlo_agrees_with_scalar_path():
    # the batched sampler must agree with build_channel on the same draws
    from satcap.capacity import sample_capacities
    from satcap.geometry import sample_hemisphere_angles

    caps = sample_capacities(CFG, 3, 10, 10, seed=4)
    theta, phi = sample_hemisphere_angles(block_rng(4, 0), (10, 3))
    for i in range(10):
        sats = [Direction(t, p) for t, p in zip(theta[i], phi[i])]
        assert caps[i] == pytest.approx(capacity(build_channel(CFG, sats), 10), abs=1e-12)


def test_monte_carlo_rejects_zero_samples():
    with pytest.raises(ValueError):
        monte_carlo(CFG, 2, 10, 0)


def test_eigen_failure_reports_sample_index(monkeypatch):
    import satcap.capacity as capmod

    real = capmod.gram_eigenvalues

    def flaky(w):
        if np.ndim(w) == 3:
            raise EigenFailure("batch")
        flaky.calls += 1
        if flaky.calls == 3:
            raise EigenFailure("bad")
        return real(w)

    flaky.calls = 0
    monkeypatch.setattr(capmod, "gram_eigenvalues", flaky)
    with pytest.raises(EigenFailure) as err:
        capmod.monte_carlo(CFG, 4, 10, 5, seed=0)
    assert err.value.sample_index == 2


def test_stats_serialization():
    s = CapacityStats.from_samples([1.0, 2.0, 3.0, 4.0], (2.5,))
    assert s.mean == 2.5 and s.second_moment == 7.5 and s.variance == pytest.approx(1.25)
    d = json.loads(json.dumps(s.to_dict()))
    assert d["outage"] == [{"threshold": 2.5, "probability": 0.5}]
    rows = dict(s.to_rows())
    assert rows["mean"] == 2.5 and rows["outage@2.5"] == 0.5


def test_rotman_monte_carlo():
    p = RotmanParams(4, 4, 0.5, 2 * math.pi)
    a = rotman_monte_carlo(p, 10, 5000, (0.0, 100.0), seed=1)
    b = rotman_monte_carlo(p, 10, 5000, (0.0, 100.0), seed=1, jobs=3)
    assert a == b
    assert 0 < a.mean < capacity_upper_bound(4, 10)
    assert a.outage == ((0.0, 0.0), (100.0, 1.0))
