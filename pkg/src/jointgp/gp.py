"""Standard zero-mean GP regression with an SE kernel.

Serves as the GP_r, GP_s and GP_{r+s} baselines and as the shared
fit/predict machinery behind the joint model.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .kernel import as_input_matrix, build_kernel_matrix, cross_kernel, factorize, solve

__all__ = ["Hyperparameters", "TrainedModel", "Prediction", "gp_fit", "gp_predict"]


@dataclass(frozen=True)
class Hyperparameters:
    """Kernel lengthscale, real-data noise std and per-source trust values."""

    lengthscale: float
    noise_std: float
    trust: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "lengthscale", float(self.lengthscale))
        object.__setattr__(self, "noise_std", float(self.noise_std))
        object.__setattr__(self, "trust", tuple(float(g) for g in np.atleast_1d(self.trust)))
        for name in ("lengthscale", "noise_std"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive and finite, got {value}")
        for k, g in enumerate(self.trust, start=1):
            if not np.isfinite(g) or g <= 0.0:
                raise ValueError(f"trust for source {k} must be positive and finite, got {g}")

    def to_log_vector(self):
        return np.log(np.array([self.lengthscale, self.noise_std, *self.trust]))

    @classmethod
    def from_log_vector(cls, theta):
        theta = np.exp(np.asarray(theta, dtype=np.float64))
        return cls(theta[0], theta[1], tuple(theta[2:]))

    def to_dict(self):
        return {"lengthscale": self.lengthscale, "noise_std": self.noise_std, "trust": list(self.trust)}


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Training data plus the factorized covariance and dual weights."""

    X: np.ndarray
    y: np.ndarray
    labels: np.ndarray
    hyperparameters: Hyperparameters
    factor: object
    alpha: np.ndarray
    noise_weights: np.ndarray = field(repr=False)

    @property
    def n_train(self):
        return self.X.shape[0]

    @property
    def real_index(self):
        return np.flatnonzero(self.labels == 0)

    def covariance(self):
        """Noisy training covariance C_n (without jitter)."""
        hp = self.hyperparameters
        C = build_kernel_matrix(self.X, hp.lengthscale)
        C[np.diag_indices_from(C)] += hp.noise_std ** 2 * self.noise_weights
        return C


@dataclass(frozen=True, eq=False)
class Prediction:
    """Predictive means and variances for a batch of test inputs.

    ``variance`` is for a noisy real observation y*; ``latent_variance``
    omits the noise term and is kept for diagnostics.
    """

    mean: np.ndarray
    variance: np.ndarray
    latent_variance: np.ndarray

    def __len__(self):
        return self.mean.shape[0]

    def __iter__(self):
        return iter(zip(self.mean, self.variance))


def _check_targets(X, y):
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite entries")
    return y


def fit_weighted(X, y, labels, hp, noise_weights):
    X = as_input_matrix(X)
    y = _check_targets(X, y)
    C = build_kernel_matrix(X, hp.lengthscale)
    C[np.diag_indices_from(C)] += hp.noise_std ** 2 * noise_weights
    factor = factorize(C)
    alpha = solve(factor, y)
    return TrainedModel(X, y, np.asarray(labels, dtype=np.int64), hp, factor, alpha, noise_weights)


def gp_fit(X, y, hp):
    """Fit a plain GP: C_n = K + noise_std^2 I, alpha = C_n^{-1} y."""
    if hp.trust:
        raise ValueError("gp_fit takes hyperparameters without trust values; use jgp_fit")
    n = np.shape(y)[0] if np.ndim(y) else 1
    return fit_weighted(X, y, np.zeros(n, dtype=np.int64), hp, np.ones(n))


def gp_predict(model, Xstar):
    """Predictive mean ``k*^T alpha`` and variance ``c* - k*^T C_n^{-1} k*``.

    ``c* = 1 + noise_std^2`` uses the real-data noise level for every model,
    including joint models: predictions always target the real distribution.
    """
    Xstar = as_input_matrix(Xstar, "Xstar")
    if Xstar.shape[1] != model.X.shape[1]:
        raise ValueError(f"Xstar has {Xstar.shape[1]} columns, model was trained on {model.X.shape[1]}")
    hp = model.hyperparameters
    Ks = cross_kernel(Xstar, model.X, hp.lengthscale)
    mean = Ks @ model.alpha
    v = solve_triangular(model.factor.lower, Ks.T, lower=True, check_finite=False)
    latent = 1.0 - np.einsum("ij,ij->j", v, v)
    if np.any(latent < -1e-10):
        warnings.warn(
            f"negative predictive variance (min {latent.min():.3e}) clamped to zero",
            RuntimeWarning,
            stacklevel=2,
        )
    latent = np.maximum(latent, 0.0)
    return Prediction(mean=mean, variance=latent + hp.noise_std ** 2, latent_variance=latent)
