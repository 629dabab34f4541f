import numpy as np
import pytest

from jointgp.gp import Hyperparameters, gp_fit, gp_predict
from jointgp.jgp import build_v, jgp_fit, jgp_predict, validate_labels


def _two_source(rng, r=10, s=20):
    X = np.concatenate((rng.uniform(-0.5, 0.5, r), rng.uniform(-2, 2, s)))[:, None]
    y = np.sin(2 * X[:, 0]) + 0.1 * rng.normal(size=r + s)
    labels = np.r_[np.zeros(r, int), np.ones(s, int)]
    return X, y, labels


class TestBuildV:
    def test_two_source(self):
        np.testing.assert_array_equal(build_v([0, 0, 1, 1], [2.0]), [1.0, 1.0, 0.5, 0.5])

    def test_unit_trust_is_identity(self):
        np.testing.assert_array_equal(build_v([0, 1, 2], [1.0, 1.0]), np.ones(3))

    def test_multisource(self):
        np.testing.assert_array_equal(build_v([0, 1, 1, 2], [4.0, 0.25]), [1.0, 0.25, 0.25, 4.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="trust"):
            build_v([0, 1, 2], [1.0])

    def test_nonpositive_trust(self):
        with pytest.raises(ValueError, match="positive"):
            build_v([0, 1], [0.0])

    def test_noncontiguous_labels(self):
        with pytest.raises(ValueError, match="contiguous"):
            validate_labels([0, 2, 2])


class TestJointFit:
    def test_unit_trust_equals_pooled_gp(self, rng):
        X, y, labels = _two_source(rng)
        a = jgp_fit(X, y, labels, Hyperparameters(0.5, 0.2, (1.0,)))
        b = gp_fit(X, y, Hyperparameters(0.5, 0.2))
        np.testing.assert_allclose(a.alpha, b.alpha, atol=1e-10)
        Xs = rng.uniform(-2, 2, size=(25, 1))
        pa, pb = jgp_predict(a, Xs), gp_predict(b, Xs)
        np.testing.assert_allclose(pa.mean, pb.mean, atol=1e-10)
        np.testing.assert_allclose(pa.variance, pb.variance, atol=1e-10)

    def test_alpha_solves_system(self, rng):
        X, y, labels = _two_source(rng)
        model = jgp_fit(X, y, labels, Hyperparameters(0.5, 0.2, (7.0,)))
        np.testing.assert_allclose(model.covariance() @ model.alpha, y, rtol=1e-8, atol=1e-10)

    def test_tiny_trust_approaches_real_only_gp(self, rng):
        X, y, labels = _two_source(rng, r=12, s=20)
        hp = Hyperparameters(0.3, 0.1, (1e-8,))
        joint = jgp_fit(X, y, labels, hp)
        real = gp_fit(X[labels == 0], y[labels == 0], Hyperparameters(0.3, 0.1))
        grid = np.linspace(-0.6, 0.6, 61)[:, None]
        dist = np.abs(grid - X[labels == 0].T)
        dense = (dist <= 0.3).sum(axis=1) >= 3
        diff = np.abs(jgp_predict(joint, grid[dense]).mean - gp_predict(real, grid[dense]).mean)
        assert dense.sum() > 10
        assert diff.max() < 1e-3

    def test_large_trust_follows_simulated_data(self, rng):
        X, y, labels = _two_source(rng, r=10, s=30)
        gamma = 1e4
        joint = jgp_fit(X, y, labels, Hyperparameters(0.3, 0.2, (gamma,)))
        sim = gp_fit(X[labels == 1], y[labels == 1], Hyperparameters(0.3, 0.2 / np.sqrt(gamma)))
        # far from the real points only simulated rows are informative
        Xs = np.array([[-1.8], [-1.4], [1.4], [1.8]])
        diff = np.abs(jgp_predict(joint, Xs).mean - gp_predict(sim, Xs).mean)
        assert diff.max() < 1e-2

    def test_multisource_collapse(self, rng):
        X, y, labels = _two_source(rng, r=8, s=16)
        multi = labels.copy()
        multi[labels == 1] = np.where(np.arange(16) % 2 == 0, 1, 2)
        a = jgp_fit(X, y, multi, Hyperparameters(0.4, 0.15, (3.5, 3.5)))
        b = jgp_fit(X, y, labels, Hyperparameters(0.4, 0.15, (3.5,)))
        np.testing.assert_allclose(a.alpha, b.alpha, rtol=0, atol=1e-12)

    def test_prediction_variance_uses_real_noise(self, rng):
        X, y, labels = _two_source(rng)
        model = jgp_fit(X, y, labels, Hyperparameters(0.5, 0.2, (100.0,)))
        pred = jgp_predict(model, [[50.0]])
        assert pred.variance[0] == pytest.approx(1.0 + 0.04, abs=1e-12)

    def test_trust_monotonically_moves_alpha_mass(self):
        grid = np.logspace(-4, 3, 15)
        for seed in range(20):
            rng = np.random.default_rng(seed)
            X, y, labels = _two_source(rng, r=8, s=12)
            sim = labels == 1
            mass = [np.abs(jgp_fit(X, y, labels, Hyperparameters(0.4, 0.3, (g,))).alpha[sim]).sum() for g in grid]
            assert np.all(np.diff(mass) >= -1e-9), seed

    def test_trust_mismatch(self, rng):
        X, y, labels = _two_source(rng)
        with pytest.raises(ValueError, match="trust"):
            jgp_fit(X, y, labels, Hyperparameters(0.5, 0.2))
