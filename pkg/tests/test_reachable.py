"""Symbolic reachable sets and their Markov chains."""

import math
from fractions import Fraction

import numpy as np
import pytest

from randbilliards import (
    BaseAngle,
    PreconditionError,
    ReachableSet,
    SymbolicAngle,
    TruncationError,
    admissible_branches,
    apply_branch,
    is_aperiodic,
    is_irreducible,
    reachable_angles,
    reaches_interval,
    stationary_distribution,
    symbolic_value,
    transition_matrix,
)
from randbilliards.errors import BranchRangeError


class TestSymbolicAngle:
    def test_validation(self):
        with pytest.raises(ValueError):
            SymbolicAngle(0, 0, 0)
        with pytest.raises(ValueError):
            SymbolicAngle(1, 1, 0)
        with pytest.raises(ValueError):
            SymbolicAngle(1, 0, 3)

    def test_branch_action(self):
        s = SymbolicAngle(1, 0, 0)
        assert s.apply(1) == SymbolicAngle(1, 0, 2)
        assert s.apply(2) == SymbolicAngle(-1, 2, -4)
        assert s.apply(3) == SymbolicAngle(1, 0, -2)
        assert s.apply(4) == SymbolicAngle(-1, 0, 4)

    def test_reflection_action_is_involution(self):
        s = SymbolicAngle(1, 0, 2)
        assert s.apply(2).apply(2) == s
        assert s.apply(4).apply(4) == s

    def test_value(self, alpha7):
        s = SymbolicAngle(-1, 0, 4)
        assert symbolic_value(s, 0.3, alpha7) == -0.3 + 4 * alpha7.value

    def test_value_out_of_range(self, alpha7):
        with pytest.raises(BranchRangeError):
            symbolic_value(SymbolicAngle(1, 2, 0), 0.3, alpha7)


class TestRationalClosure:
    """alpha = pi/7, theta0 = pi/20: the seven-state chain."""

    @pytest.fixture
    def rset(self, alpha7):
        return reachable_angles(Fraction(1, 20), alpha7)

    def test_exactly_seven_states(self, rset):
        assert len(rset) == 7
        assert not rset.truncated

    def test_state_set_symbolically(self, rset):
        r = Fraction(1, 20)
        expected = {
            r,
            r + Fraction(2, 7),
            r + Fraction(4, 7),
            r + Fraction(6, 7),
            -r + Fraction(2, 7),
            -r + Fraction(4, 7),
            -r + Fraction(6, 7),
        }
        got = {
            s.sign * rset.theta0_ratio + s.j + s.k * rset.alpha.ratio for s in rset.states
        }
        assert got == expected

    def test_values_sorted_and_inside_range(self, rset):
        v = rset.values
        assert np.all(np.diff(v) > 0)
        assert v.min() > 0 and v.max() < math.pi

    def test_membership_queries(self, rset):
        assert rset.contains_value(Fraction(1, 20))
        assert rset.contains_value(Fraction(1, 20) + Fraction(2, 7))
        assert not rset.contains_value(Fraction(1, 2))

    def test_index_of_round_trips(self, rset):
        for idx, s in enumerate(rset.states):
            assert rset.index_of(s) == idx
        with pytest.raises(KeyError):
            rset.index_of(SymbolicAngle(1, 0, 20))

    def test_no_coincidences_for_exact_data(self, rset):
        assert rset.coincidences == ()

    def test_matrix_is_stochastic(self, rset):
        P = transition_matrix(rset)
        assert P.shape == (7, 7)
        assert np.abs(P.sum(axis=1) - 1.0).max() < 1e-14
        assert P.min() >= 0.0

    def test_chain_is_irreducible_and_aperiodic(self, rset):
        P = transition_matrix(rset)
        assert is_irreducible(P)
        assert is_aperiodic(P)

    def test_stationary_is_sine_weighted(self, rset):
        P = transition_matrix(rset)
        pi_vec = stationary_distribution(P)
        assert np.abs(pi_vec @ P - pi_vec).max() <= 1e-12
        w = np.sin(rset.values)
        np.testing.assert_allclose(pi_vec, w / w.sum(), rtol=0, atol=1e-12)

    def test_to_dict_schema(self, rset):
        d = rset.to_dict()
        assert d["alpha"]["form"] == "rational"
        assert len(d["states"]) == 7
        assert {"sign", "j", "k", "value"} <= set(d["states"][0])
        assert d["coincidences"] == []


class TestClosureVariants:
    def test_generic_float_theta0_same_size(self, alpha7):
        # off-lattice float start: same 7-state structure, keyed without ratio
        rset = reachable_angles(0.2345, alpha7)
        assert len(rset) == 7
        assert rset.theta0_ratio is None

    def test_lattice_snap_on_multiple_of_alpha(self, alpha7):
        # theta0 = 2*alpha as a float sits on the pi/7 lattice, where the
        # reflected symbol -theta0 + 4*alpha collides with theta0 itself;
        # the snap restores the exact identity
        rset = reachable_angles(2.0 * math.pi / 7.0, alpha7)
        assert rset.theta0_ratio == Fraction(2, 7)
        got = sorted(s.sign * Fraction(2, 7) + s.j + s.k * Fraction(1, 7) for s in rset.states)
        assert got == [Fraction(2, 7), Fraction(4, 7), Fraction(6, 7)]

    def test_lattice_snap_right_angle_even_n(self):
        a8 = BaseAngle.rational(1, 8)
        rset = reachable_angles(math.pi / 2, a8)
        assert rset.theta0_ratio == Fraction(1, 2)
        assert rset.contains_value(Fraction(1, 2))

    def test_right_angle_states_odd_n(self, alpha7):
        # exact input: the 7 states are the odd multiples of pi/14
        rset = reachable_angles(Fraction(1, 2), alpha7)
        assert len(rset) == 7
        got = sorted(s.sign * Fraction(1, 2) + s.j + s.k * Fraction(1, 7) for s in rset.states)
        assert got == [Fraction(k, 14) for k in (1, 3, 5, 7, 9, 11, 13)]

    def test_irrational_alpha_truncates(self, alpha_irr):
        rset = reachable_angles(0.9, alpha_irr, max_depth=6)
        assert rset.truncated
        assert len(rset) > 7
        gaps = np.diff(rset.values)
        assert gaps.min() > 1e-9  # generic theta0: no value collisions

    def test_irrational_lattice_coincidence_reported(self, alpha_irr):
        # theta0 = 2*alpha exactly: distinct symbols share a value
        rset = reachable_angles(1.0, alpha_irr, max_depth=6)
        assert rset.coincidences != ()

    def test_strict_matrix_refuses_truncated(self, alpha_irr):
        rset = reachable_angles(0.9, alpha_irr, max_depth=4)
        with pytest.raises(TruncationError):
            transition_matrix(rset)
        P = transition_matrix(rset, strict=False)
        assert P.sum(axis=1).max() <= 1.0 + 1e-12

    def test_theta0_out_of_range(self, alpha7):
        with pytest.raises(Exception):
            reachable_angles(0.0, alpha7)


class TestChainPredicates:
    def test_reducible_matrix(self):
        P = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert not is_irreducible(P)
        with pytest.raises(PreconditionError):
            is_aperiodic(P)
        with pytest.raises(PreconditionError):
            stationary_distribution(P)

    def test_periodic_two_cycle(self):
        P = np.array([[0.0, 1.0], [1.0, 0.0]])
        assert is_irreducible(P)
        assert not is_aperiodic(P)
        np.testing.assert_allclose(stationary_distribution(P), [0.5, 0.5])

    def test_single_state(self):
        assert stationary_distribution(np.array([[1.0]])) == np.array([1.0])


class TestReachesInterval:
    def test_witness_word_is_admissible(self, alpha7):
        ok, word = reaches_interval(0.95, alpha7)
        assert ok
        th = 0.95
        for i in word:
            assert i in admissible_branches(th, alpha7)
            th = apply_branch(i, th, alpha7)
        assert 0.0 < th < alpha7.value

    def test_empty_word_when_already_inside(self, alpha7):
        ok, word = reaches_interval(0.1, alpha7)
        assert ok and word == []

    def test_needs_reflection_leg(self, alpha7):
        # theta0 in (alpha, 2 alpha) finishes through T4 then T3
        ok, word = reaches_interval(1.5 * alpha7.value, alpha7)
        assert ok and word == [4, 3]

    def test_multiple_of_alpha_excluded(self, alpha7):
        with pytest.raises(PreconditionError):
            reaches_interval(2 * alpha7.value, alpha7)
