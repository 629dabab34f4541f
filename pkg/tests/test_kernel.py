import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from jointgp.kernel import (
    JITTER_LADDER,
    NotPositiveDefiniteError,
    build_kernel_matrix,
    cross_kernel,
    factorize,
    se_kernel,
    solve,
)

from conftest import brute_kernel


class TestSeKernel:
    def test_zero_distance(self):
        assert se_kernel([0.3, -1.2], [0.3, -1.2], 1.0) == 1.0

    def test_unit_distance(self):
        assert se_kernel([0.0], [1.0], 1.0) == pytest.approx(np.exp(-0.5), rel=1e-15)
        assert se_kernel(0.0, 1.0, 1.0) == pytest.approx(0.60653066, abs=1e-8)

    def test_pythagorean(self):
        assert se_kernel([0.0, 0.0], [3.0, 4.0], 5.0) == pytest.approx(np.exp(-0.5), rel=1e-15)

    def test_symmetric(self, rng):
        a, b = rng.normal(size=3), rng.normal(size=3)
        assert se_kernel(a, b, 0.7) == se_kernel(b, a, 0.7)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            se_kernel([0.0, 1.0], [0.0], 1.0)

    @pytest.mark.parametrize("bad", [0.0, -1.0, np.nan, np.inf])
    def test_bad_lengthscale(self, bad):
        with pytest.raises(ValueError, match="lengthscale"):
            se_kernel([0.0], [1.0], bad)

    def test_monotone_in_distance(self):
        distances = np.sort(np.random.default_rng(3).uniform(0, 5, size=50))
        values = [se_kernel([0.0], [d], 1.3) for d in distances]
        assert np.all(np.diff(values) <= 0.0)


class TestKernelMatrix:
    def test_single_row(self):
        np.testing.assert_array_equal(build_kernel_matrix([[2.5, 1.0]], 0.3), [[1.0]])

    def test_identical_rows(self):
        np.testing.assert_array_equal(build_kernel_matrix([[1.0, 2.0], [1.0, 2.0]], 0.5), np.ones((2, 2)))

    def test_matches_brute_force(self, rng):
        X = rng.normal(size=(5, 3))
        np.testing.assert_allclose(build_kernel_matrix(X, 2.0), brute_kernel(X, X, 2.0), rtol=1e-14, atol=0)

    def test_cross_matches_brute_force(self, rng):
        X1, X2 = rng.normal(size=(4, 2)), rng.normal(size=(7, 2))
        np.testing.assert_allclose(cross_kernel(X1, X2, 0.8), brute_kernel(X1, X2, 0.8), rtol=1e-14, atol=0)

    def test_cross_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            cross_kernel(np.zeros((2, 2)), np.zeros((2, 3)), 1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="non-finite"):
            build_kernel_matrix([[0.0], [np.nan]], 1.0)

    @settings(max_examples=60, deadline=None)
    @given(
        X=arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)),
                 elements=st.floats(-50, 50, allow_nan=False)),
        lengthscale=st.floats(1e-2, 1e2),
    )
    def test_symmetric_unit_diagonal(self, X, lengthscale):
        K = build_kernel_matrix(X, lengthscale)
        assert np.all(np.diag(K) == 1.0)
        np.testing.assert_array_equal(K, K.T)
        assert np.all((K >= 0.0) & (K <= 1.0))


class TestFactorize:
    def test_no_jitter_for_spd(self, rng):
        A = rng.normal(size=(6, 6))
        C = A @ A.T + 6 * np.eye(6)
        f = factorize(C)
        assert f.jitter == 0.0
        assert np.all(np.diag(f.lower) > 0)
        np.testing.assert_allclose(f.lower @ f.lower.T, C, rtol=1e-10)

    def test_jitter_ladder_escalates(self):
        # duplicated rows: singular kernel matrix
        K = build_kernel_matrix([[0.0], [0.0], [1.0]], 1.0)
        f = factorize(K)
        assert f.jitter in [r * np.trace(K) / 3 for r in JITTER_LADDER[1:]]
        np.testing.assert_allclose(f.lower @ f.lower.T, K + f.jitter * np.eye(3), rtol=1e-10, atol=1e-14)

    def test_indefinite_names_pivot(self):
        C = np.array([[1.0, 2.0], [2.0, 1.0]])
        with pytest.raises(NotPositiveDefiniteError, match="minimum pivot") as err:
            factorize(C)
        assert err.value.min_pivot < 0

    @pytest.mark.parametrize("n", [1, 10, 50, 200])
    def test_solve_recovers_vector(self, rng, n):
        A = rng.normal(size=(n, n))
        C = A @ A.T / n + np.eye(n)
        v = rng.normal(size=n)
        x = solve(factorize(C), C @ v)
        assert np.linalg.norm(x - v) <= 1e-8 * np.linalg.norm(v)
        b = rng.normal(size=n)
        x = solve(factorize(C), b)
        assert np.linalg.norm(C @ x - b) / np.linalg.norm(b) <= 1e-8

    def test_solve_matrix_rhs(self, rng):
        A = rng.normal(size=(5, 5))
        C = A @ A.T + np.eye(5)
        B = rng.normal(size=(5, 3))
        np.testing.assert_allclose(C @ solve(factorize(C), B), B, atol=1e-10)

    def test_solve_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            solve(factorize(np.eye(3)), np.ones(4))
