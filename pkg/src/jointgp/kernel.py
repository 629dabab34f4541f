"""Squared-exponential kernel and Cholesky-based covariance handling."""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, lapack

from ._backend import se_kernel_matrix
from ._fallback import JITTER_LADDER

__all__ = [
    "JITTER_LADDER",
    "CovarianceFactor",
    "NotPositiveDefiniteError",
    "as_input_matrix",
    "build_kernel_matrix",
    "cross_kernel",
    "factorize",
    "se_kernel",
    "solve",
]


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a covariance matrix cannot be Cholesky-factorized."""

    def __init__(self, message, min_pivot=None):
        super().__init__(message)
        self.min_pivot = min_pivot


def _check_lengthscale(lengthscale):
    lengthscale = float(lengthscale)
    if not np.isfinite(lengthscale) or lengthscale <= 0.0:
        raise ValueError(f"lengthscale must be a positive finite number, got {lengthscale}")
    return lengthscale


def as_input_matrix(X, name="X"):
    """Return ``X`` as a finite float64 array of shape (n, d).

    One-dimensional input is interpreted as n samples of a scalar feature.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def se_kernel(x1, x2, lengthscale):
    """k(x1, x2) = exp(-||x1 - x2||^2 / (2 lengthscale^2))."""
    lengthscale = _check_lengthscale(lengthscale)
    x1 = np.atleast_1d(np.asarray(x1, dtype=np.float64))
    x2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
    if x1.shape != x2.shape or x1.ndim != 1:
        raise ValueError(f"input vectors must share one dimension, got {x1.shape} and {x2.shape}")
    diff = x1 - x2
    return float(np.exp(-np.dot(diff, diff) / (2.0 * lengthscale * lengthscale)))


def build_kernel_matrix(X, lengthscale):
    """Symmetric SE Gram matrix of the rows of ``X`` (unit diagonal)."""
    lengthscale = _check_lengthscale(lengthscale)
    return se_kernel_matrix(as_input_matrix(X), None, lengthscale)


def cross_kernel(X1, X2, lengthscale):
    """SE kernel between every row of ``X1`` and every row of ``X2``."""
    lengthscale = _check_lengthscale(lengthscale)
    X1 = as_input_matrix(X1, "X1")
    X2 = as_input_matrix(X2, "X2")
    if X1.shape[1] != X2.shape[1]:
        raise ValueError(f"dimension mismatch: {X1.shape[1]} vs {X2.shape[1]} columns")
    return se_kernel_matrix(X1, X2, lengthscale)


@dataclass(frozen=True)
class CovarianceFactor:
    """Lower Cholesky factor of ``C + jitter * I``.

    ``jitter`` is the absolute amount added to the diagonal.
    """

    lower: np.ndarray
    jitter: float

    @property
    def size(self):
        return self.lower.shape[0]


def _min_pivot(C):
    # unpivoted elimination; only used to build the error message
    A = np.array(C, dtype=np.float64)
    pivots = []
    for k in range(A.shape[0]):
        p = A[k, k]
        pivots.append(p)
        if p == 0.0:
            break
        A[k + 1:, k + 1:] -= np.outer(A[k + 1:, k], A[k, k + 1:]) / p
    return min(pivots)


def factorize(C):
    """Cholesky-factorize ``C``, escalating diagonal jitter if needed.

    The jitter ladder is ``JITTER_LADDER`` times the mean diagonal of ``C``;
    the first rung that succeeds is recorded on the returned factor.
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"covariance must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("covariance contains non-finite entries")
    n = C.shape[0]
    scale = float(np.trace(C)) / n
    for rung in JITTER_LADDER:
        jitter = rung * scale
        A = C + jitter * np.eye(n) if jitter > 0.0 else C
        L, info = lapack.dpotrf(A, lower=1, clean=1)
        if info == 0:
            return CovarianceFactor(lower=L, jitter=jitter)
    pivot = _min_pivot(C + JITTER_LADDER[-1] * scale * np.eye(n))
    raise NotPositiveDefiniteError(
        f"matrix is not positive definite (minimum pivot {pivot:.3e} at maximum jitter "
        f"{JITTER_LADDER[-1] * scale:.3e})",
        min_pivot=pivot,
    )


def solve(factor, b):
    """Return ``(C + jitter I)^{-1} b`` using two triangular solves."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != factor.size:
        raise ValueError(f"dimension mismatch: factor is {factor.size}x{factor.size}, rhs has {b.shape[0]} rows")
    return cho_solve((factor.lower, True), b, check_finite=False)
