import numpy as np
import pytest

from bwkit import (
    ConvexSetSpec,
    DimensionMismatch,
    InfeasibleSet,
    bw_distance_squared,
    clamp_psd,
    default_init,
    membership,
    project_half_step,
    set_distance,
)
from bwkit.sampling import random_pd
from bwkit.set_geometry import constraint_violation, cross_check

TRACE1 = ConvexSetSpec(5, trace_eq=1.0)
TRACE2 = ConvexSetSpec(5, trace_eq=2.0)


class TestSpecAndMembership:
    def test_membership_examples(self):
        assert membership(TRACE1, np.eye(5) / 5.0)
        assert not membership(TRACE1, np.eye(5))
        assert not membership(ConvexSetSpec(2), np.diag([1.0, -0.1]))

    def test_violation_is_zero_inside(self):
        assert constraint_violation(TRACE1, np.eye(5) / 5.0) <= 1e-15

    def test_dimension_checked(self):
        with pytest.raises(DimensionMismatch):
            membership(TRACE1, np.eye(3))

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            ConvexSetSpec(2, frobenius_ball=(np.eye(2), 0.0))

    def test_constraint_matrix_dimension(self):
        with pytest.raises(DimensionMismatch):
            ConvexSetSpec(3, linear_eqs=((np.eye(2), 1.0),))


class TestHalfStep:
    def test_anchor_inside_target(self):
        x, value = project_half_step(np.eye(5), ConvexSetSpec(5, trace_eq=5.0))
        assert value <= 1e-7
        np.testing.assert_allclose(x.entries, np.eye(5), atol=1e-5)

    def test_trace_halving_projection(self):
        a = random_pd(4, seed=9, cond=20.0)
        a = a * (2.0 / np.trace(a))  # trace 2
        x, value = project_half_step(a, ConvexSetSpec(4, trace_eq=1.0))
        np.testing.assert_allclose(x.entries, a / 2.0, atol=2e-5)
        assert value == pytest.approx((1 - 1 / np.sqrt(2)) ** 2 * 2.0, abs=1e-6)
        # tightness: reported value equals the closed form at the minimizer
        closed = bw_distance_squared(a, clamp_psd(x)).distance_squared
        assert abs(value - closed) <= 1e-4

    def test_near_rank_one_anchor(self):
        anchor = np.diag([1.0, 1e-4]) + 1e-8 * np.eye(2)
        x, _ = project_half_step(anchor, ConvexSetSpec(2, trace_eq=1.0))
        np.testing.assert_allclose(
            x.entries, anchor / np.trace(anchor), atol=1e-4)

    def test_infeasible_target(self):
        spec = ConvexSetSpec(2, trace_eq=1.0,
                             linear_eqs=((np.eye(2), 5.0),))  # Tr = 1 and Tr = 5
        with pytest.raises(InfeasibleSet):
            project_half_step(np.eye(2), spec)


class TestSetDistance:
    def test_identical_sets(self):
        r = set_distance(TRACE1, ConvexSetSpec(5, trace_eq=1.0))
        assert r.distance_squared <= 1e-7
        assert np.abs(r.witness_a.entries - r.witness_b.entries).max() <= 1e-5

    def test_trace_sets(self):
        r = set_distance(TRACE1, TRACE2)
        assert r.converged
        assert r.distance_squared == pytest.approx((np.sqrt(2) - 1) ** 2, abs=1e-6)
        assert np.abs(r.witness_b.entries - 2.0 * r.witness_a.entries).max() <= 1e-3
        assert cross_check(r) <= 1e-4

    def test_monotone_descent_and_fixed_point(self):
        spec_a = ConvexSetSpec(3, frobenius_ball=(np.eye(3), 1.0))
        spec_b = ConvexSetSpec(3, frobenius_ball=(5.0 * np.eye(3), 1.0))
        r = set_distance(spec_a, spec_b)
        assert r.converged
        hist = r.objective_history
        assert all(hist[k + 1] <= hist[k] + 1e-9 for k in range(len(hist) - 1))
        assert r.distance_squared > 0.1
        # witnesses inside their sets and on the ball boundaries
        assert membership(spec_a, r.witness_a, tol=1e-6)
        assert membership(spec_b, r.witness_b, tol=1e-6)
        assert np.linalg.norm(r.witness_a.entries - np.eye(3)) == pytest.approx(1.0, abs=1e-3)
        assert np.linalg.norm(r.witness_b.entries - 5.0 * np.eye(3)) == pytest.approx(1.0, abs=1e-3)
        assert cross_check(r) <= 1e-4
        # one more half-step from the converged witness barely moves the value
        _, again = project_half_step(r.witness_b, spec_a)
        assert abs(again - r.distance_squared) <= 1e-6 * (1 + r.distance_squared)

    def test_swap_symmetry(self):
        r_ab = set_distance(TRACE1, TRACE2)
        r_ba = set_distance(TRACE2, TRACE1)
        assert abs(r_ab.distance_squared - r_ba.distance_squared) <= 5e-4

    def test_max_iter_flag(self):
        r = set_distance(TRACE1, TRACE2, max_iter=1)
        assert not r.converged
        assert r.iterations == 1

    def test_init_must_be_member(self):
        with pytest.raises(ValueError):
            set_distance(TRACE1, TRACE2, init=np.eye(5))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            set_distance(TRACE1, ConvexSetSpec(3, trace_eq=1.0))


class TestDefaultInit:
    def test_pure_trace_set(self):
        init = default_init(ConvexSetSpec(4, trace_eq=2.0))
        np.testing.assert_allclose(init.entries, np.eye(4) / 2.0)

    def test_negative_trace_infeasible(self):
        with pytest.raises(InfeasibleSet):
            default_init(ConvexSetSpec(3, trace_eq=-1.0))

    def test_general_spec_feasible_point(self):
        spec = ConvexSetSpec(3, trace_eq=2.0,
                             linear_ineqs=((np.diag([1.0, 0, 0]), 0.5),))
        init = default_init(spec)
        assert membership(spec, init, tol=1e-6)

    def test_conflicting_constraints(self):
        spec = ConvexSetSpec(2, trace_eq=1.0, linear_eqs=((np.eye(2), 3.0),))
        with pytest.raises(InfeasibleSet):
            default_init(spec)
