import numpy as np
import pytest

from jointgp.gp import Hyperparameters, gp_fit, gp_predict
from jointgp.kernel import build_kernel_matrix

from conftest import conditional_gaussian, gauss_solve


def _data(rng, n=10, d=1):
    X = rng.uniform(-2, 2, size=(n, d))
    y = np.sin(2 * X[:, 0]) + 0.1 * rng.normal(size=n)
    return X, y


class TestHyperparameters:
    @pytest.mark.parametrize("kwargs", [
        {"lengthscale": 0.0, "noise_std": 1.0},
        {"lengthscale": 1.0, "noise_std": -1.0},
        {"lengthscale": 1.0, "noise_std": 1.0, "trust": (1.0, 0.0)},
    ])
    def test_rejects_nonpositive(self, kwargs):
        with pytest.raises(ValueError):
            Hyperparameters(**kwargs)

    def test_log_round_trip(self):
        hp = Hyperparameters(0.3, 0.05, (2.0, 1e-4))
        back = Hyperparameters.from_log_vector(hp.to_log_vector())
        np.testing.assert_allclose(back.to_log_vector(), hp.to_log_vector(), rtol=1e-15)


class TestFit:
    def test_single_point(self):
        model = gp_fit([[0.0]], [2.0], Hyperparameters(1.0, 1.0))
        np.testing.assert_allclose(model.alpha, [1.0], rtol=1e-15)

    def test_zero_targets(self, rng):
        X, _ = _data(rng)
        model = gp_fit(X, np.zeros(10), Hyperparameters(0.5, 0.2))
        np.testing.assert_array_equal(model.alpha, np.zeros(10))

    def test_alpha_matches_gaussian_elimination(self, rng):
        X, y = _data(rng)
        hp = Hyperparameters(0.7, 0.3)
        model = gp_fit(X, y, hp)
        expected = gauss_solve(build_kernel_matrix(X, 0.7) + 0.09 * np.eye(10), y)
        np.testing.assert_allclose(model.alpha, expected, rtol=1e-10)
        np.testing.assert_allclose(model.covariance() @ model.alpha, y, rtol=1e-8)
        assert np.all(model.labels == 0)

    def test_rejects_trust(self, rng):
        X, y = _data(rng)
        with pytest.raises(ValueError, match="jgp_fit"):
            gp_fit(X, y, Hyperparameters(1.0, 0.1, (1.0,)))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="rows"):
            gp_fit(np.zeros((3, 1)), np.zeros(2), Hyperparameters(1.0, 0.1))


class TestPredict:
    def test_interpolates_without_noise(self, rng):
        X = np.linspace(-1, 1, 8)[:, None]
        y = np.cos(3 * X[:, 0])
        model = gp_fit(X, y, Hyperparameters(0.4, 1e-8))
        np.testing.assert_allclose(gp_predict(model, X).mean, y, atol=1e-4)

    def test_reverts_to_prior_far_away(self, rng):
        X, y = _data(rng)
        model = gp_fit(X, y, Hyperparameters(0.3, 0.2))
        pred = gp_predict(model, [[1e3]])
        assert pred.mean[0] == pytest.approx(0.0, abs=1e-12)
        assert pred.variance[0] == pytest.approx(1.0 + 0.04, abs=1e-12)

    def test_matches_joint_conditioning(self, rng):
        X, y = _data(rng)
        hp = Hyperparameters(0.6, 0.25)
        model = gp_fit(X, y, hp)
        Xs = rng.uniform(-2.5, 2.5, size=(5, 1))
        pred = gp_predict(model, Xs)
        for k in range(5):
            mu, var = conditional_gaussian(X, y, np.full(10, 0.0625), Xs[k], 0.6, 0.25)
            assert pred.mean[k] == pytest.approx(mu, abs=1e-10)
            assert pred.variance[k] == pytest.approx(var, abs=1e-10)
        np.testing.assert_allclose(pred.variance - pred.latent_variance, 0.0625, atol=1e-15)

    def test_variance_bounded_by_prior(self, rng):
        X, y = _data(rng, n=30, d=2)
        model = gp_fit(X, y, Hyperparameters(0.5, 0.1))
        pred = gp_predict(model, rng.uniform(-3, 3, size=(200, 2)))
        assert np.all(pred.variance <= 1.0 + 0.01 + 1e-12)
        assert np.all(pred.variance >= 0.01)

    def test_adding_data_never_increases_variance(self, rng):
        X, y = _data(rng, n=12)
        hp = Hyperparameters(0.5, 0.1)
        Xs = np.linspace(-3, 3, 40)[:, None]
        before = gp_predict(gp_fit(X[:11], y[:11], hp), Xs).variance
        after = gp_predict(gp_fit(X, y, hp), Xs).variance
        assert np.all(after <= before + 1e-12)

    def test_permutation_invariant(self, rng):
        X, y = _data(rng, n=15, d=2)
        hp = Hyperparameters(0.8, 0.2)
        Xs = rng.normal(size=(10, 2))
        perm = rng.permutation(15)
        a = gp_predict(gp_fit(X, y, hp), Xs)
        b = gp_predict(gp_fit(X[perm], y[perm], hp), Xs)
        np.testing.assert_allclose(a.mean, b.mean, atol=1e-10)
        np.testing.assert_allclose(a.variance, b.variance, atol=1e-10)

    def test_dimension_mismatch(self, rng):
        X, y = _data(rng)
        model = gp_fit(X, y, Hyperparameters(1.0, 0.1))
        with pytest.raises(ValueError, match="columns"):
            gp_predict(model, np.zeros((2, 3)))

    def test_iterates_as_pairs(self, rng):
        X, y = _data(rng)
        pred = gp_predict(gp_fit(X, y, Hyperparameters(1.0, 0.1)), X[:3])
        assert len(pred) == 3
        assert [m for m, _ in pred] == list(pred.mean)
