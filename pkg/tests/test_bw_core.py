import math
import warnings

import numpy as np
import pytest

from bwkit import (
    ClampWarning,
    DimensionMismatch,
    bw_distance_squared,
    fidelity_term,
)
from bwkit.sampling import random_pd


def diag_pair(rng, n):
    return (np.diag(np.exp(rng.uniform(0, 3, n))),
            np.diag(np.exp(rng.uniform(0, 3, n))))


class TestFidelityTerm:
    def test_identity_pair(self):
        assert fidelity_term(np.eye(5), np.eye(5)) == pytest.approx(5.0)

    def test_diagonal_pair(self):
        # diagonal case: sum of sqrt(a_i b_i)
        assert fidelity_term(np.diag([1.0, 4.0]), np.diag([4.0, 1.0])) == pytest.approx(4.0)

    def test_equal_inputs_give_trace(self):
        a = random_pd(4, seed=3, cond=50.0)
        assert fidelity_term(a, a) == pytest.approx(float(np.trace(a)), rel=1e-12)

    def test_symmetric_in_arguments(self):
        a = random_pd(5, seed=1, cond=100.0)
        b = random_pd(5, seed=2, cond=100.0)
        f_ab, f_ba = fidelity_term(a, b), fidelity_term(b, a)
        assert abs(f_ab - f_ba) <= 1e-9 * abs(f_ab)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fidelity_term(np.eye(2), np.eye(3))


class TestBwDistanceSquared:
    def test_identity_of_indiscernibles(self):
        a = random_pd(5, seed=7, cond=1e3)
        r = bw_distance_squared(a, a)
        assert r.distance_squared <= 1e-9 * float(np.trace(a))

    def test_clamp_is_silent_within_roundoff_window(self):
        a = random_pd(6, seed=8, cond=1e3)
        with warnings.catch_warnings():
            warnings.simplefilter("error", ClampWarning)
            r = bw_distance_squared(a, a)
        assert r.distance_squared >= 0.0

    def test_diagonal_pair(self):
        r = bw_distance_squared(np.diag([1.0, 4.0]), np.diag([4.0, 1.0]))
        assert r.distance_squared == pytest.approx(2.0, abs=1e-12)

    def test_scalar_multiple(self):
        # commuting pair: rho^2(A, cA) = (1 - sqrt(c))^2 * Tr(A)
        a = np.diag([0.5, 1.5])  # trace 2
        r = bw_distance_squared(a, 0.25 * a)
        assert r.distance_squared == pytest.approx(0.5, abs=1e-12)
        assert r.distance_squared == pytest.approx(
            float(np.trace(a)) + 0.25 * float(np.trace(a)) - 2 * r.fidelity_term,
            rel=1e-12)

    def test_distance_is_sqrt_of_squared(self):
        a = random_pd(3, seed=5)
        b = random_pd(3, seed=6)
        r = bw_distance_squared(a, b)
        assert r.distance == pytest.approx(math.sqrt(r.distance_squared))


class TestMetricProperties:
    def test_symmetry_100_pairs(self):
        rng = np.random.default_rng(42)
        for k in range(100):
            n = 2 + k % 7
            a = random_pd(n, cond=10.0 ** (k % 4), rng=rng)
            b = random_pd(n, cond=10.0 ** (k % 4), rng=rng)
            ab = bw_distance_squared(a, b).distance_squared
            ba = bw_distance_squared(b, a).distance_squared
            assert abs(ab - ba) <= 1e-9 * (1 + ab)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(43)
        for k in range(60):
            n = 2 + k % 7
            a, b, c = (random_pd(n, cond=100.0, rng=rng) for _ in range(3))
            rho = lambda x, y: bw_distance_squared(x, y).distance
            assert rho(a, c) <= rho(a, b) + rho(b, c) + 1e-7

    def test_trace_lower_bound(self):
        rng = np.random.default_rng(44)
        for k in range(60):
            n = 2 + k % 7
            a = random_pd(n, cond=1e3, rng=rng)
            b = random_pd(n, cond=1e3, rng=rng)
            bound = (math.sqrt(np.trace(a)) - math.sqrt(np.trace(b))) ** 2
            assert bw_distance_squared(a, b).distance_squared >= bound - 1e-9

    def test_diagonal_reduction(self):
        rng = np.random.default_rng(45)
        for k in range(60):
            n = 2 + k % 7
            a, b = diag_pair(rng, n)
            expected = float(((np.sqrt(np.diag(a)) - np.sqrt(np.diag(b))) ** 2).sum())
            got = bw_distance_squared(a, b).distance_squared
            assert abs(got - expected) <= 1e-9
