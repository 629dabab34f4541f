"""Least-squares (weighted kernel ridge) formulation of the joint model.

Minimizes ``||y_r - Phi_r w||^2 + lam1 ||y_s - Phi_s w||^2 + lam2 ||w||^2``
in the dual, ``w = Phi_n^T alpha``, which gives the closed form

    (K_nr K_rn + lam1 K_ns K_sn + lam2 K_nn) alpha = K_nr y_r + lam1 K_ns y_s

Its predictive mean coincides with the joint GP mean for trust = lam1 and
noise variance = lam2; only means are produced.
"""
from dataclasses import dataclass

import numpy as np

from .jgp import validate_labels
from .kernel import as_input_matrix, build_kernel_matrix, cross_kernel, factorize, solve

__all__ = ["RidgeWeights", "lsjgp_fit", "lsjgp_predict", "lsjgp_objective"]


@dataclass(frozen=True, eq=False)
class RidgeWeights:
    lambda1: float
    lambda2: float
    lengthscale: float
    alpha: np.ndarray


def _split(X, y, labels):
    X = as_input_matrix(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != X.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
    labels, m = validate_labels(labels, X.shape[0])
    if m > 1:
        raise ValueError(f"the least-squares joint model supports one simulated source, got {m}")
    return X, y, labels == 0


def lsjgp_fit(X, y, labels, lambda1, lambda2, lengthscale):
    """Closed-form dual weights of the weighted kernel-ridge objective."""
    lambda1, lambda2 = float(lambda1), float(lambda2)
    if lambda1 < 0.0:
        raise ValueError(f"lambda1 must be nonnegative, got {lambda1}")
    if lambda2 <= 0.0:
        raise ValueError(f"lambda2 must be positive, got {lambda2}")
    X, y, real = _split(X, y, labels)
    K = build_kernel_matrix(X, lengthscale)
    K_nr, K_ns = K[:, real], K[:, ~real]
    system = K_nr @ K_nr.T + lambda1 * (K_ns @ K_ns.T) + lambda2 * K
    system = 0.5 * (system + system.T)
    rhs = K_nr @ y[real] + lambda1 * (K_ns @ y[~real])
    alpha = solve(factorize(system), rhs)
    return RidgeWeights(lambda1, lambda2, float(lengthscale), alpha)


def lsjgp_predict(weights, X, Xstar):
    """Mean predictions ``k*^T alpha``; no variance is available."""
    X = as_input_matrix(X)
    if X.shape[0] != weights.alpha.shape[0]:
        raise ValueError(f"weights have {weights.alpha.shape[0]} entries but X has {X.shape[0]} rows")
    return cross_kernel(Xstar, X, weights.lengthscale) @ weights.alpha


def lsjgp_objective(weights, X, y, labels, alpha=None):
    """Primal loss at ``alpha`` (default: the fitted weights), via kernel identities."""
    X, y, real = _split(X, y, labels)
    alpha = weights.alpha if alpha is None else np.asarray(alpha, dtype=np.float64)
    K = build_kernel_matrix(X, weights.lengthscale)
    f = K @ alpha
    real_err = y[real] - f[real]
    sim_err = y[~real] - f[~real]
    return float(real_err @ real_err + weights.lambda1 * (sim_err @ sim_err) + weights.lambda2 * (alpha @ f))
