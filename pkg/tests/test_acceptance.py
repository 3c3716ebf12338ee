"""Exit criteria. Each test prints one PASS/FAIL line in the terminal summary."""
import csv
import io
import math
import time

import numpy as np
import pytest

from oracles import hermitian_eigs_closed_form
from satcap.capacity import (
    capacity,
    capacity_upper_bound,
    gram,
    gram_eigenvalues,
    monte_carlo,
    printed_bound,
)
from satcap.channel import ChannelMatrix, RotmanParams, rotman_eta, rotman_matrix, steering_matrix
from satcap.cli import run
from satcap.geometry import ArrayConfig
from satcap.placement import off_diagonal_norm, optimal_nus, realize_constellation
from satcap.channel import build_channel
from satcap.sphere import covering_radius, known_table, min_pairwise_angle, solve_packing

pytestmark = pytest.mark.usefixtures("criterion")


def _cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    assert code == 0, err.getvalue()
    return list(csv.DictReader(io.StringIO(out.getvalue())))


@pytest.mark.criterion("1 table reproduction")
def test_table_reproduction():
    t0 = time.perf_counter()
    rows = _cli("sphere", "table")
    errata = {r["item"]: r for r in _cli("errata")}
    elapsed = time.perf_counter() - t0
    by = {(r["mode"], int(r["N"])): r for r in rows}
    assert len(rows) == 28
    for n in range(4, 18):
        r = by[("covering", n)]
        assert abs(float(r["coverage"]) - float(r["printed_coverage"])) <= 2e-3, n
        if n != 4:
            r = by[("packing", n)]
            assert abs(float(r["coverage"]) - float(r["printed_coverage"])) <= 7e-3, n
    assert float(by[("covering", 4)]["coverage"]) == pytest.approx(1.3333, abs=2e-3)
    assert float(by[("covering", 5)]["coverage"]) == pytest.approx(1.3819, abs=2e-3)
    assert float(by[("covering", 12)]["coverage"]) == pytest.approx(1.2320, abs=2e-3)
    assert float(by[("packing", 12)]["coverage"]) == pytest.approx(0.8961, abs=7e-3)
    assert float(by[("packing", 5)]["coverage"]) == pytest.approx(0.7322, abs=7e-3)
    n4 = errata["packing_coverage_N4"]
    assert float(n4["printed"]) == 0.8386
    assert float(n4["recomputed"]) == pytest.approx(0.8453, abs=1e-4)
    assert elapsed < 1.0


@pytest.mark.criterion("2 optimal placement attainment")
def test_optimal_placement_attainment():
    t0 = time.perf_counter()
    for n in (2, 3, 4, 6, 8):
        for kd in (math.pi, 2 * math.pi):
            opt = optimal_nus(n, n, kd)
            h = build_channel(ArrayConfig.from_kd(n, kd), realize_constellation(opt, "y"))
            assert abs(capacity(h, 10) - n * math.log2(1 + 10 / n)) <= 1e-9
            assert off_diagonal_norm(gram(h)) <= 1e-10
    assert optimal_nus(4, 4, math.pi).nus == (-0.75, -0.25, 0.25, 0.75)
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion("3 corrected capacity bound")
def test_bound_property():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        n_r, n_t = (int(v) for v in rng.integers(1, 7, 2))
        snr = float(rng.choice([0.1, 1.0, 10.0, 100.0]))
        h = ChannelMatrix(steering_matrix(rng.uniform(-1, 1, n_t), n_r, rng.uniform(math.pi, 3 * math.pi)))
        assert capacity(h, snr) <= capacity_upper_bound(min(n_r, n_t), snr) + 1e-9
    optimum = capacity_upper_bound(4, 10)
    assert optimum == pytest.approx(7.2294, abs=1e-4)
    assert printed_bound(4, 10) == pytest.approx(3.8074, abs=1e-4)
    assert optimum > printed_bound(4, 10)
    assert time.perf_counter() - t0 < 30.0


@pytest.mark.criterion("4 packing solver")
def test_packing_solver():
    t0 = time.perf_counter()
    for n, target in ((4, 109.4712), (6, 90.0), (12, 63.4349)):
        angle = min_pairwise_angle(solve_packing(n, seed=0, restarts=50))
        assert abs(angle - target) <= 0.05, n
    for n in range(4, 18):
        angle = min_pairwise_angle(solve_packing(n, seed=0, restarts=20))
        assert angle <= known_table(n) + 1e-6, n
    assert time.perf_counter() - t0 < 120.0


@pytest.mark.criterion("5 covering radius")
def test_covering_radius():
    t0 = time.perf_counter()
    for n, target in ((4, 70.5287), (6, 54.7356), (12, 37.3773)):
        r = covering_radius(solve_packing(n, seed=0, restarts=20), 100_000)
        assert abs(r - target) <= 0.3, n
    assert time.perf_counter() - t0 < 60.0


@pytest.mark.criterion("6 Monte Carlo contracts")
def test_monte_carlo_contracts():
    t0 = time.perf_counter()
    thresholds = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
    for n_t, n_r, alignment in ((4, 4, "y"), (2, 4, "x"), (6, 3, "z")):
        cfg = ArrayConfig.from_kd(n_r, math.pi, alignment)
        a = monte_carlo(cfg, n_t, 10, 100_000, thresholds, seed=2024, jobs=1)
        b = monte_carlo(cfg, n_t, 10, 100_000, thresholds, seed=2024, jobs=4)
        c = monte_carlo(cfg, n_t, 10, 100_000, thresholds, seed=2024, jobs=1)
        assert a == b == c
        assert a.variance >= 0
        probs = [p for _, p in a.outage]
        assert probs[0] == 0.0
        assert all(q >= p for p, q in zip(probs, probs[1:]))
        assert 0 < a.mean < capacity_upper_bound(min(n_t, n_r), 10)
    assert time.perf_counter() - t0 < 60.0


@pytest.mark.criterion("7 Rotman lens")
def test_rotman_lens():
    k, d = 2 * math.pi, 0.5
    assert list(rotman_eta(4, d)) == [-1.5 * d, -0.5 * d, 0.5 * d, 1.5 * d]
    rng = np.random.default_rng(0)
    for n_t, n_r in ((4, 4), (3, 5), (6, 2)):
        p = RotmanParams(n_t, n_r, d, k, w0=0.3, phase_delays=(0.7,) * n_t, ttd=True)
        s = rotman_matrix(p, list(rng.uniform(0, math.pi / 2, n_t))).entries
        assert np.max(np.abs(np.abs(s) - 1 / math.sqrt(n_t * n_r))) <= 1e-12
    for n_t, n_r in ((4, 4), (2, 4), (3, 8)):
        grid = optimal_nus(n_t, n_r, k * d).nus  # kd sin(theta_m) on the n_r-point grid
        p = RotmanParams(n_t, n_r, d, k, ttd=True)
        s = rotman_matrix(p, list(np.arcsin(grid))).entries
        w = s.conj().T @ s
        assert off_diagonal_norm(w) <= 1e-10


@pytest.mark.criterion("8 eigen oracle")
def test_eigen_oracle():
    rng = np.random.default_rng(8)
    checked = 0
    for _ in range(10_000):
        n_r, n_t = (int(v) for v in rng.integers(1, 7, 2))
        if min(n_r, n_t) not in (2, 3):
            continue
        h = ChannelMatrix(steering_matrix(rng.uniform(-1, 1, n_t), n_r, rng.uniform(math.pi, 3 * math.pi)))
        w = gram(h)
        np.testing.assert_allclose(gram_eigenvalues(w), hermitian_eigs_closed_form(w), atol=1e-9)
        checked += 1
    assert checked > 1000
