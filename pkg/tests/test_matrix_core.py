import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from src.shrinkage.elliptical_model import replication_rng
from src.shrinkage.matrix_core import (
    SigmaSpec,
    eigen_sym_truncated,
    gram,
    penrose_residuals,
    pinv_from_eigen,
    reconstruction_error,
    sigma_build,
    spectral_inverse,
    sym_sqrt,
)
from src.utils.error_handling import DegenerateSampleError, InvalidInputError
from src.utils.validation import relative_frobenius_error
from tests.conftest import random_spd

dims = st.integers(min_value=1, max_value=8)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestSigmaBuild:
    def test_identity_is_exact(self):
        assert np.array_equal(sigma_build(SigmaSpec.identity(4)), np.eye(4))

    def test_ar1_entries(self):
        expected = np.array([[1.0, 0.9, 0.81], [0.9, 1.0, 0.9], [0.81, 0.9, 1.0]])
        np.testing.assert_allclose(
            sigma_build(SigmaSpec.ar1(3, 0.9)), expected, rtol=0, atol=1e-15
        )

    @settings(deadline=None, max_examples=60)
    @given(
        st.integers(min_value=1, max_value=200),
        st.floats(min_value=-0.95, max_value=0.95),
    )
    def test_ar1_is_positive_definite(self, p, rho):
        sigma = sigma_build(SigmaSpec.ar1(p, rho))
        assert np.linalg.eigvalsh(sigma)[0] > 0

    @pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
    def test_ar1_rejects_unit_root(self, rho):
        with pytest.raises(InvalidInputError):
            sigma_build(SigmaSpec.ar1(3, rho))

    def test_dense_round_trip(self, rng):
        sigma = random_spd(rng, 4)
        np.testing.assert_allclose(sigma_build(SigmaSpec.dense(sigma)), sigma)

    def test_dense_rejects_indefinite(self):
        with pytest.raises(InvalidInputError):
            sigma_build(SigmaSpec.dense(np.diag([1.0, -1.0])))

    def test_dense_rejects_asymmetric(self):
        with pytest.raises(InvalidInputError):
            sigma_build(SigmaSpec.dense(np.array([[1.0, 0.5], [0.0, 1.0]])))

    def test_rejects_zero_dimension(self):
        with pytest.raises(InvalidInputError):
            sigma_build(SigmaSpec.identity(0))


class TestSymSqrt:
    @settings(max_examples=50, deadline=None)
    @given(dims, seeds)
    def test_square_recovers_input(self, p, seed):
        rng = replication_rng(seed, 0)
        g = rng.standard_normal((p, p + 2))
        a = g @ g.T
        root = sym_sqrt(a)
        assert np.array_equal(root, root.T)
        assert relative_frobenius_error(root @ root, a) <= 1e-10

    def test_clips_round_off_negatives(self):
        a = np.diag([4.0, -1e-13])
        np.testing.assert_allclose(sym_sqrt(a), np.diag([2.0, 0.0]))

    def test_rejects_negative_definite(self):
        with pytest.raises(InvalidInputError):
            sym_sqrt(np.diag([1.0, -0.5]))

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInputError):
            sym_sqrt(np.array([[1.0, 1e-6], [0.0, 1.0]]))

    def test_ar1_round_trip(self):
        sigma = sigma_build(SigmaSpec.ar1(30, 0.9))
        root = sym_sqrt(sigma)
        assert relative_frobenius_error(root @ root, sigma) <= 1e-10


class TestEigenSymTruncated:
    def test_wide_sample_has_rank_m(self, rng):
        u = rng.standard_normal((3, 5))
        s = gram(u)
        es = eigen_sym_truncated(s)
        assert es.r == 3
        assert es.p == 5
        assert reconstruction_error(es, s) <= 1e-8
        np.testing.assert_allclose(es.H.T @ es.H, np.eye(3), atol=1e-10)

    def test_eigenvalues_positive_and_decreasing(self, rng):
        s = gram(rng.standard_normal((10, 4)))
        es = eigen_sym_truncated(s)
        assert np.all(es.L > 0)
        assert np.all(np.diff(es.L) <= 0)

    def test_first_nonzero_component_is_positive(self, rng):
        es = eigen_sym_truncated(gram(rng.standard_normal((8, 6))))
        for column in es.H.T:
            first = column[np.argmax(np.abs(column) > 1e-12 * np.abs(column).max())]
            assert first > 0

    def test_max_rank_caps_round_off_eigenvalues(self, rng):
        u = rng.standard_normal((2, 6))
        es = eigen_sym_truncated(gram(u), rank_tol=0.0, max_rank=2)
        assert es.r == 2

    def test_zero_matrix_is_degenerate(self):
        with pytest.raises(DegenerateSampleError):
            eigen_sym_truncated(np.zeros((3, 3)))

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInputError):
            eigen_sym_truncated(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestPseudoInverse:
    @settings(max_examples=60, deadline=None)
    @given(dims, dims, seeds)
    def test_penrose_conditions(self, p, m, seed):
        rng = replication_rng(seed, 0)
        s = gram(rng.standard_normal((m, p)))
        es = eigen_sym_truncated(s, max_rank=min(p, m))
        s_pinv = pinv_from_eigen(es)
        assert es.r == min(p, m)
        assert max(penrose_residuals(s, s_pinv)) <= 1e-8
        assert abs(np.trace(s_pinv @ s) - es.r) <= 1e-8 * es.r

    def test_matches_inverse_when_full_rank(self, rng):
        s = gram(rng.standard_normal((12, 4)))
        s_pinv = pinv_from_eigen(eigen_sym_truncated(s))
        np.testing.assert_allclose(s_pinv, np.linalg.inv(s), rtol=1e-8, atol=1e-12)

    def test_spectral_inverse(self, rng):
        sigma = random_spd(rng, 5)
        product = spectral_inverse(sigma) @ sigma
        np.testing.assert_allclose(product, np.eye(5), atol=1e-10)

    def test_spectral_inverse_rejects_singular(self):
        with pytest.raises(InvalidInputError):
            spectral_inverse(np.diag([1.0, 0.0]))


class TestGram:
    @settings(max_examples=30, deadline=None)
    @given(dims, dims, seeds)
    def test_exactly_symmetric(self, p, m, seed):
        s = gram(replication_rng(seed, 0).standard_normal((m, p)))
        assert s.shape == (p, p)
        assert np.array_equal(s, s.T)

    def test_rejects_vector(self):
        with pytest.raises(InvalidInputError):
            gram(np.ones(3))
