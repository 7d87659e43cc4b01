"""Random billiard on the circular table."""

import math
from fractions import Fraction

import numpy as np
import pytest

from randbilliards import (
    InadmissibleBranchError,
    JacobianAccumulator,
    PhasePoint,
    PreconditionError,
    accumulate_jacobian,
    caustic,
    chord_distance_check,
    circle_step,
    dense_orbit_discrepancy,
    jacobian_step,
    lyapunov_estimate,
    prescribed_orbit,
    reachable_angles,
    ring_coverage,
    simulate,
    trajectory_csv,
    trajectory_svg,
)


class TestPhasePoint:
    def test_position_reduced_mod_2pi(self):
        p = PhasePoint(7.0, 1.0)
        assert p.s == 7.0 % (2 * math.pi)

    def test_theta_range_enforced(self):
        with pytest.raises(ValueError):
            PhasePoint(0.0, 0.0)
        with pytest.raises(ValueError):
            PhasePoint(0.0, math.pi)


class TestCircleStep:
    def test_geometry(self, alpha7):
        p = PhasePoint(0.3, 1.0)
        q = circle_step(p, 1, alpha7)
        assert q.theta == 1.0 + 2 * alpha7.value
        assert q.s == (0.3 + 2 * q.theta) % (2 * math.pi)

    def test_inadmissible_branch_rejected(self, alpha7):
        with pytest.raises(InadmissibleBranchError):
            circle_step(PhasePoint(0.0, math.pi / 20), 2, alpha7)


class TestSimulate:
    def test_reproducible(self, alpha7):
        t1 = simulate(PhasePoint(0.0, 1.0), 200, alpha7, 5)
        t2 = simulate(PhasePoint(0.0, 1.0), 200, alpha7, 5)
        assert np.array_equal(t1.s, t2.s)
        assert np.array_equal(t1.theta, t2.theta)
        assert np.array_equal(t1.branches, t2.branches)

    def test_seed_matters(self, alpha7):
        t1 = simulate(PhasePoint(0.0, 1.0), 200, alpha7, 5)
        t2 = simulate(PhasePoint(0.0, 1.0), 200, alpha7, 6)
        assert not np.array_equal(t1.branches, t2.branches)

    def test_zero_steps(self, alpha7):
        t = simulate(PhasePoint(0.5, 1.0), 0, alpha7, 0)
        assert t.n == 0
        assert len(t.s) == 1 and len(t.branches) == 0

    def test_step_invariants(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 500, alpha7, 11)
        assert t.theta.min() > 0 and t.theta.max() < math.pi
        expect = (t.s[:-1] + 2 * t.theta[1:]) % (2 * math.pi)
        np.testing.assert_allclose(t.s[1:], expect, rtol=0, atol=1e-12)

    def test_negative_steps_rejected(self, alpha7):
        with pytest.raises(ValueError):
            simulate(PhasePoint(0.0, 1.0), -1, alpha7, 0)


class TestPrescribedOrbit:
    def test_alternating_word_advances_linearly(self, alpha7):
        s0, th0 = 0.2, 0.3
        t = prescribed_orbit(PhasePoint(s0, th0), [1, 3] * 10, alpha7)
        pred = (s0 + 40 * (th0 + alpha7.value)) % (2 * math.pi)
        assert abs(t.s[-1] - pred) < 1e-12

    def test_reports_offending_position(self, alpha7):
        with pytest.raises(InadmissibleBranchError, match="word position 1"):
            prescribed_orbit(PhasePoint(0.0, 0.1), [1, 2], alpha7)


class TestCaustic:
    def test_exact_radius_from_reachable_set(self, alpha7):
        rset = reachable_angles(Fraction(1, 20), alpha7)
        est = caustic(rset)
        brute = np.abs(np.cos(rset.values)).min()
        assert est.radius == brute
        assert not est.degenerate
        assert abs(math.cos(est.attaining_angle)) == est.radius

    def test_right_angle_start_degenerates(self, alpha7):
        est = caustic(reachable_angles(Fraction(1, 2), alpha7))
        assert est.degenerate
        assert est.radius == 0.0

    def test_degenerate_when_right_angle_reachable(self, alpha7):
        # theta0 = pi/2 - 2 alpha reaches pi/2 through T1
        est = caustic(reachable_angles(Fraction(1, 2) - Fraction(2, 7), alpha7))
        assert est.degenerate and est.radius == 0.0

    def test_trajectory_caustic(self, alpha7):
        t = simulate(PhasePoint(0.0, math.pi / 20), 400, alpha7, 3)
        est = caustic(t)
        assert est.radius == np.abs(np.cos(t.theta)).min()

    def test_chords_respect_radius(self, alpha7):
        t = simulate(PhasePoint(0.0, math.pi / 20), 2000, alpha7, 3)
        assert chord_distance_check(t) < 1e-9

    def test_chord_check_needs_a_chord(self, alpha7):
        with pytest.raises(PreconditionError):
            chord_distance_check(simulate(PhasePoint(0.0, 1.0), 0, alpha7, 0))


class TestEquidistribution:
    def test_discrepancy_shrinks(self, alpha_irr):
        short = simulate(PhasePoint(0.0, 1.2345), 500, alpha_irr, 2)
        long = simulate(PhasePoint(0.0, 1.2345), 50_000, alpha_irr, 2)
        assert dense_orbit_discrepancy(long, 20) < dense_orbit_discrepancy(short, 20)
        assert dense_orbit_discrepancy(long, 20) < 0.2

    def test_needs_enough_points(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 5, alpha7, 0)
        with pytest.raises(PreconditionError):
            dense_orbit_discrepancy(t, 20)

    def test_ring_coverage_fills(self, alpha7):
        t = simulate(PhasePoint(0.0, math.pi / 20), 30_000, alpha7, 7)
        cov = ring_coverage(t, caustic(t), 10, 30)
        assert cov > 0.95


class TestJacobian:
    def test_single_steps(self):
        acc = jacobian_step(JacobianAccumulator(), 1)
        assert (acc.a, acc.b, acc.n) == (2, 1, 1)
        acc = jacobian_step(JacobianAccumulator(), 2)
        assert (acc.a, acc.b, acc.n) == (-2, -1, 1)

    def test_structural_invariants_along_run(self, alpha7):
        t = simulate(PhasePoint(0.0, math.pi / 20), 2000, alpha7, 13)
        acc = JacobianAccumulator()
        for k, i in enumerate(t.branches, start=1):
            acc = jacobian_step(acc, int(i))
            assert acc.b in (-1, 1)
            assert acc.a % 2 == 0
            assert abs(acc.a) <= 2 * k

    def test_accumulate_matches_loop(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 300, alpha7, 17)
        acc = accumulate_jacobian(t.branches)
        assert acc.n == 300

    def test_invariant_direction_gives_zero(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 1000, alpha7, 17)
        assert lyapunov_estimate(t, (1.0, 0.0)) == 0.0

    def test_generic_direction_is_small(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 20_000, alpha7, 17)
        assert abs(lyapunov_estimate(t, (0.0, 1.0))) < 0.01

    def test_rejects_bad_input(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 10, alpha7, 0)
        with pytest.raises(PreconditionError):
            lyapunov_estimate(t, (0.0, 0.0))
        empty = simulate(PhasePoint(0.0, 1.0), 0, alpha7, 0)
        with pytest.raises(PreconditionError):
            lyapunov_estimate(empty, (0.0, 1.0))


class TestExports:
    def test_csv_round_trip(self, alpha7):
        t = simulate(PhasePoint(0.25, 1.0), 25, alpha7, 9)
        text = trajectory_csv(t)
        lines = text.strip().splitlines()
        assert lines[0] == "step,s,theta,branch"
        assert len(lines) == 27
        first = lines[1].split(",")
        assert first[3] == "0"  # start row carries no branch
        for k, row in enumerate(lines[1:]):
            step, s, th, br = row.split(",")
            assert int(step) == k
            assert float(s) == t.s[k]
            assert float(th) == t.theta[k]

    def test_svg_structure(self, alpha7):
        t = simulate(PhasePoint(0.0, math.pi / 20), 100, alpha7, 9)
        svg = trajectory_svg(t, caustic(t))
        assert svg.startswith("<?xml") or svg.startswith("<svg")
        assert "<circle" in svg and "polyline" in svg
        assert "stroke-dasharray" in svg  # caustic circle drawn dashed

    def test_svg_without_caustic(self, alpha7):
        t = simulate(PhasePoint(0.0, 1.0), 10, alpha7, 9)
        svg = trajectory_svg(t)
        assert "polyline" in svg
