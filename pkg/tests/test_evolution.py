"""Densities under the transition kernel, skew product, invariance checks."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from randbilliards import (
    AngleDensity,
    BaseAngle,
    GridMismatchError,
    PreconditionError,
    SkewState,
    aligned_bins,
    apply_branch,
    density_csv,
    ensemble_step,
    invariant_family_check,
    invariant_intervals,
    invariant_union_mu,
    kernel_pushforward,
    knudsen_run,
    liouville_residual,
    mu_density,
    mu_measure,
    product_measure_evolution,
    skew_branch,
    skew_ensemble_step,
    skew_step,
    total_variation,
    transfer_matrix,
)


def test_mu_basics():
    assert mu_measure(0.0, math.pi) == pytest.approx(1.0, abs=1e-15)
    assert mu_density(math.pi / 2) == 0.5
    assert mu_measure(0.0, math.pi / 2) == pytest.approx(0.5, abs=1e-15)


class TestAngleDensity:
    def test_from_mu(self):
        d = AngleDensity.from_mu(64)
        assert d.bins == 64
        assert d.reference == "mu"
        assert abs(d.masses.sum() - 1.0) < 1e-12
        # cell mass equals the exact cosine difference
        e = d.edges
        np.testing.assert_allclose(
            d.masses, 0.5 * (np.cos(e[:-1]) - np.cos(e[1:])), rtol=0, atol=1e-15
        )

    def test_uniform_interval(self):
        d = AngleDensity.uniform_interval(100, 0.5, 1.5)
        assert abs(d.masses.sum() - 1.0) < 1e-12
        mids = 0.5 * (d.edges[:-1] + d.edges[1:])
        assert d.masses[(mids < 0.5 - 0.05) | (mids > 1.5 + 0.05)].max() == 0.0

    def test_mu_restricted(self):
        d = AngleDensity.mu_restricted(128, 0.2, 0.6)
        assert abs(d.masses.sum() - 1.0) < 1e-12
        sup = np.flatnonzero(d.masses)
        lo, hi = d.edges[sup.min()], d.edges[sup.max() + 1]
        assert lo <= 0.2 and hi >= 0.6

    def test_validation(self):
        with pytest.raises(ValueError):
            AngleDensity(np.array([0.5, 0.6]))  # does not sum to 1
        with pytest.raises(ValueError):
            AngleDensity(np.array([1.5, -0.5]))
        with pytest.raises(ValueError):
            AngleDensity(np.array([1.0]), reference="cauchy")

    def test_support_cells(self):
        d = AngleDensity.uniform_interval(10, 0.0, math.pi / 2)
        assert d.support_cells.max() <= 5


class TestKernel:
    def test_columns_are_stochastic(self, alpha7):
        M = transfer_matrix(84, alpha7)
        np.testing.assert_allclose(M.sum(axis=0), 1.0, rtol=0, atol=1e-12)
        assert M.min() >= 0.0

    def test_pushforward_conserves_mass(self, alpha7):
        d = AngleDensity.uniform_interval(84, 0.4, 2.0)
        out = kernel_pushforward(d, alpha7)
        assert abs(out.masses.sum() - 1.0) < 1e-12

    def test_mu_is_near_fixed_point(self, alpha7):
        # discretization defect shrinks quadratically with resolution
        defects = []
        for bins in (126, 252, 504):
            mu = AngleDensity.from_mu(bins)
            defects.append(total_variation(kernel_pushforward(mu, alpha7), mu))
            assert defects[-1] <= 4.0 / bins**2
        assert defects[0] > defects[1] > defects[2]

    def test_total_variation_properties(self):
        d1 = AngleDensity.from_mu(32)
        d2 = AngleDensity.uniform_interval(32, 0.1, 0.4)
        assert total_variation(d1, d1) == 0.0
        assert 0.0 < total_variation(d1, d2) <= 1.0

    def test_grid_mismatch(self):
        with pytest.raises(GridMismatchError):
            total_variation(AngleDensity.from_mu(32), AngleDensity.from_mu(64))

    def test_point_mass_splits_to_two_cells(self, alpha7):
        # the cell at pi/2 goes half to T1's image cell, half to T3's
        N = 252
        M = transfer_matrix(N, alpha7)
        col = M[:, N // 2]
        support = np.flatnonzero(col)
        assert len(support) == 2
        assert abs(col.sum() - 1.0) < 1e-12
        np.testing.assert_allclose(col[support], 0.5, atol=2e-3)


class TestKnudsen:
    def test_irrational_converges(self, alpha_irr):
        init = AngleDensity.mu_restricted(128, 0.3, 0.8)
        tv = knudsen_run(init, alpha_irr, 300)
        assert len(tv) == 301
        assert tv[300] < 0.05 < tv[0]
        assert tv[300] < tv[50]

    def test_rational_stalls(self, alpha7):
        N = aligned_bins(alpha7, 256)
        lo, hi = invariant_intervals(alpha7)[0]
        init = AngleDensity.uniform_interval(N, float(lo) * math.pi, float(hi) * math.pi)
        tv = knudsen_run(init, alpha7, 200)
        floor = 1.0 - invariant_union_mu(7) - 2.0 / N
        assert tv[50:].min() >= floor


class TestInvariantFamily:
    def test_intervals_exact(self, alpha7):
        iv = invariant_intervals(alpha7)
        assert len(iv) == 7
        for j, (lo, hi) in enumerate(iv, start=1):
            assert hi - lo == Fraction(1, 14)
            assert (lo + hi) / 2 == Fraction(2 * j - 1, 14)

    def test_rational_only(self, alpha_irr):
        with pytest.raises(PreconditionError):
            invariant_intervals(alpha_irr)

    @pytest.mark.parametrize("m,n,mappings", [(1, 7, 14), (1, 9, 18), (2, 13, 26)])
    def test_family_is_permuted(self, m, n, mappings):
        rep = invariant_family_check(BaseAngle.rational(m, n))
        assert rep.ok
        assert rep.violations == ()
        assert len(rep.mappings) == mappings
        assert rep.lebesgue_total == Fraction(1, 2)

    def test_union_measure_closed_form(self):
        # mu(union I_j) = 1 / (2 cos(pi/4n)), cross-checked by quadrature
        for n in (7, 9, 13):
            val = invariant_union_mu(n)
            quad = sum(
                integrate.quad(lambda t: 0.5 * math.sin(t), (4 * j - 3) * math.pi / (4 * n),
                               (4 * j - 1) * math.pi / (4 * n))[0]
                for j in range(1, n + 1)
            )
            assert abs(val - quad) < 1e-12
            assert abs(val - 1.0 / (2.0 * math.cos(math.pi / (4 * n)))) < 1e-15

    def test_aligned_bins(self):
        assert aligned_bins(BaseAngle.rational(1, 7), 256) == 252
        assert aligned_bins(BaseAngle.rational(1, 9), 256) == 252
        assert aligned_bins(BaseAngle.rational(2, 13), 256) == 260


class TestEnsemble:
    def test_deterministic_with_int_seed(self, alpha7):
        th = np.linspace(0.5, 2.5, 1000)
        a = ensemble_step(th, alpha7, 3)
        b = ensemble_step(th, alpha7, 3)
        assert np.array_equal(a, b)

    def test_right_angle_splits_evenly(self, alpha7):
        th = np.full(20_000, math.pi / 2)
        out = ensemble_step(th, alpha7, 5)
        up = math.pi / 2 + 2 * alpha7.value
        down = math.pi / 2 - 2 * alpha7.value
        assert set(np.unique(out)) == {down, up}
        assert abs((out == up).mean() - 0.5) < 0.02

    def test_rejects_boundary_particles(self, alpha7):
        with pytest.raises(PreconditionError):
            ensemble_step(np.array([0.0, 1.0]), alpha7, 0)

    def test_empty_input(self, alpha7):
        assert ensemble_step(np.array([]), alpha7, 0).size == 0


class TestSkewProduct:
    def test_worked_step(self, alpha7):
        # at theta = pi/2 the cumulative cells are J1 = [0, 1/2), J3 = [1/2, 1)
        out = skew_step(SkewState(0.25, math.pi / 2), alpha7)
        assert out.x == 0.5
        assert out.theta == math.pi / 2 + 2 * alpha7.value

    def test_cell_boundary_goes_right(self, alpha7):
        out = skew_step(SkewState(0.5, math.pi / 2), alpha7)
        assert out.x == 0.0
        assert out.theta == math.pi / 2 - 2 * alpha7.value

    def test_branch_selection(self, alpha7):
        assert skew_branch(0.25, math.pi / 2, alpha7) == 1
        assert skew_branch(0.75, math.pi / 2, alpha7) == 3
        assert skew_branch(1.0, math.pi / 2, alpha7) == 3  # null event, last cell

    def test_skew_never_picks_zero_probability_branch(self, alpha7, rng):
        for _ in range(200):
            x, th = rng.random(), rng.uniform(0.05, math.pi - 0.05)
            i = skew_branch(x, th, alpha7)
            from randbilliards import admissible_branches

            assert i in admissible_branches(th, alpha7)

    def test_vectorized_matches_scalar(self, alpha7, rng):
        xs = rng.random(500)
        ths = rng.uniform(0.1, math.pi - 0.1, 500)
        phi, new = skew_ensemble_step(xs, ths, alpha7)
        for k in range(500):
            st = skew_step(SkewState(xs[k], ths[k]), alpha7)
            assert abs(st.x - phi[k]) < 1e-12
            assert abs(st.theta - new[k]) < 1e-12

    def test_state_validation(self):
        with pytest.raises(ValueError):
            SkewState(1.5, 1.0)
        with pytest.raises(ValueError):
            SkewState(0.5, -1.0)


class TestInvariance:
    def test_liouville_residual_small(self, alpha7):
        res = liouville_residual(alpha7, [lambda t: 1.0, math.sin])
        assert res <= 1e-8

    def test_product_evolution_keeps_positions_uniform(self, alpha_irr):
        rep = product_measure_evolution(
            True, AngleDensity.mu_restricted(64, 0.3, 1.1), alpha_irr, 50,
            seed=3, particles=5000
        )
        assert rep.s_uniform_ok
        assert rep.tv[-1] < rep.tv[0]
        assert 0 in rep.checked_steps and 50 in rep.checked_steps

    def test_product_evolution_requires_uniform_marginal(self, alpha_irr):
        with pytest.raises(PreconditionError):
            product_measure_evolution(False, AngleDensity.from_mu(64), alpha_irr, 10)


def test_density_csv():
    d = AngleDensity.from_mu(16)
    lines = density_csv(d).strip().splitlines()
    assert lines[0] == "bin_left,bin_right,mass"
    assert len(lines) == 17
    left, right, mass = lines[1].split(",")
    assert float(left) == 0.0
    assert float(mass) == d.masses[0]


def test_apply_branch_reexported(alpha7):
    assert apply_branch(1, 1.0, alpha7) == 1.0 + 2 * alpha7.value
