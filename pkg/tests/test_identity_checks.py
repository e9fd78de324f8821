import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from src.shrinkage.elliptical_model import ModelSpec, replication_rng
from src.shrinkage.estimators import ShrinkagePsi, b0_bound, trace_lower_bound
from src.shrinkage.identity_checks import (
    IdentityCheckResult,
    certify_haff_bound,
    check_spectrum_gaps,
    corollary_rhs_integrand,
    g_psi,
    haff_improvement_margin,
    random_spectrum,
    stein_haff_check,
    stein_haff_check_elliptical,
)
from src.shrinkage.matrix_core import SigmaSpec, sigma_build
from src.utils.error_handling import InvalidInputError, NearTieError

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestSpectrumGaps:
    def test_accepts_separated_spectrum(self):
        spectrum = check_spectrum_gaps([3.0, 2.0, 1.0])
        assert spectrum.dtype == np.float64

    def test_near_tie(self):
        with pytest.raises(NearTieError):
            check_spectrum_gaps([2.0, 2.0 - 1e-12, 1.0])

    def test_increasing_order(self):
        with pytest.raises(InvalidInputError):
            check_spectrum_gaps([1.0, 2.0])


class TestRhsIntegrand:
    @settings(max_examples=100, deadline=None)
    @given(seeds, st.integers(min_value=1, max_value=10), st.integers(0, 10))
    def test_identity_phi_gives_r_times_v(self, seed, r, extra):
        v = r + extra
        spectrum = random_spectrum(r, replication_rng(seed, 0))
        value = corollary_rhs_integrand(spectrum, ShrinkagePsi.constant(1.0), v, r)
        assert value == r * v

    def test_finite_difference_agrees(self):
        spectrum = np.array([6.0, 3.0, 1.5, 0.2])
        psi = ShrinkagePsi.haff(2.0, 1.3)
        analytic = corollary_rhs_integrand(spectrum, psi, 9, 4)
        numeric = corollary_rhs_integrand(
            spectrum, psi, 9, 4, method="finite-difference"
        )
        assert analytic == pytest.approx(numeric, rel=1e-6)


class TestGPsi:
    def test_derivative_methods_agree(self):
        spectrum = np.array([4.0, 1.0])
        psi = ShrinkagePsi.haff(1.0, 1.0)
        analytic = g_psi(spectrum, psi, 10, 2, lam=1.0)
        numeric = g_psi(spectrum, psi, 10, 2, lam=1.0, method="finite-difference")
        assert analytic == pytest.approx(numeric, rel=1e-6)

    def test_variants_agree_without_cross_terms(self):
        psi = ShrinkagePsi.haff(1.0, 0.5)
        spectrum = np.array([2.0])
        printed = g_psi(spectrum, psi, 6, 1, lam=0.5)
        symmetrized = g_psi(spectrum, psi, 6, 1, lam=0.5, symmetrized=True)
        assert printed == symmetrized

    def test_zero_psi_is_zero(self):
        spectrum = np.array([5.0, 2.0, 1.0])
        assert g_psi(spectrum, ShrinkagePsi.zero(), 8, 3, lam=0.0) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(
        seeds,
        st.integers(min_value=2, max_value=12),
        st.integers(min_value=0, max_value=30),
        st.floats(min_value=1.0, max_value=10.0),
        st.floats(min_value=1e-6, max_value=1.0),
    )
    def test_haff_below_margin(self, seed, r, extra, alpha, fraction):
        v = r + extra
        b = fraction * b0_bound(v, r)
        spectrum = random_spectrum(r, replication_rng(seed, 0))
        psi = ShrinkagePsi.haff(alpha, b)
        try:
            g = g_psi(spectrum, psi, v, r, lam=trace_lower_bound(psi, v, r))
        except NearTieError:
            return
        margin = haff_improvement_margin(v, r, b)
        assert margin <= 1e-12
        assert g <= margin + 1e-9 * max(1.0, abs(margin))


class TestMargin:
    @pytest.mark.parametrize("v, r", [(25, 10), (50, 20), (10, 5), (12, 12)])
    def test_vanishes_at_b0(self, v, r):
        assert haff_improvement_margin(v, r, b0_bound(v, r)) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_negative_inside_range(self):
        assert haff_improvement_margin(25, 10, 0.5) < 0

    def test_positive_beyond_b0(self):
        assert haff_improvement_margin(25, 10, 2 * b0_bound(25, 10)) > 0

    def test_requires_positive_b(self):
        with pytest.raises(InvalidInputError):
            haff_improvement_margin(25, 10, 0.0)


class TestCertificate:
    @pytest.mark.parametrize("v, r", [(25, 10), (50, 20), (10, 5)])
    def test_haff_bound_is_certified(self, v, r):
        result = certify_haff_bound(v, r, 300, replication_rng(1, 0, stream=2))
        assert result.trials == 300
        assert result.worst_excess <= 1e-9
        assert result.max_margin <= 1e-9

    def test_rank_one_has_no_range(self, rng):
        with pytest.raises(InvalidInputError):
            certify_haff_bound(10, 1, 5, rng)

    def test_random_spectrum_range(self, rng):
        spectrum = random_spectrum(50, rng)
        assert np.all(np.diff(spectrum) <= 0)
        assert spectrum.min() >= 1e-3
        assert spectrum.max() <= 1e3


class TestIdentityCheckResult:
    def test_constant_equal_samples(self):
        result = IdentityCheckResult.from_samples(np.full(4, 2.0), np.full(4, 2.0))
        assert result.z_score == 0.0
        assert result.passed

    def test_constant_different_samples(self):
        result = IdentityCheckResult.from_samples(np.full(4, 2.0), np.full(4, 1.0))
        assert result.z_score == np.inf
        assert not result.passed

    def test_z_score(self):
        lhs = np.array([1.0, 3.0])
        rhs = np.array([0.0, 0.0])
        result = IdentityCheckResult.from_samples(lhs, rhs, skipped=1)
        assert result.lhs_se == pytest.approx(1.0)
        assert result.z_score == pytest.approx(2.0)
        assert result.skipped == 1


class TestSteinHaffCheck:
    def test_identity_phi(self):
        result = stein_haff_check(
            np.eye(5), 5, 10, ShrinkagePsi.constant(1.0), reps=2000, seed=4
        )
        assert result.rhs_mean == 50
        assert result.rhs_se == 0
        assert result.lhs_mean == pytest.approx(50, rel=0.02)
        assert result.passed

    @pytest.mark.parametrize("p, m", [(5, 10), (10, 4), (4, 12)])
    def test_haff_phi(self, p, m):
        sigma = sigma_build(SigmaSpec.ar1(p, 0.9))
        result = stein_haff_check(
            sigma, p, m, ShrinkagePsi.haff(1.0, 1.0), reps=2000, seed=4, threads=2
        )
        assert result.reps + result.skipped == 2000
        assert result.passed

    def test_student_companion(self):
        result = stein_haff_check_elliptical(
            ModelSpec.student_t(5),
            np.eye(4),
            4,
            12,
            ShrinkagePsi.constant(1.0),
            reps=4000,
            seed=4,
        )
        assert result.rhs_mean == pytest.approx(5 / 3 * 48)
        assert result.passed
