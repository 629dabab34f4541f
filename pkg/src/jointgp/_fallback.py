"""Pure-Python (numpy/scipy) implementations of the hot kernels.

These mirror ``_core.pyx`` exactly and are used whenever the compiled
extension is unavailable or ``JOINTGP_PURE_PYTHON=1`` is set.
"""
import numpy as np
from scipy.linalg import lapack
from scipy.spatial.distance import cdist

JITTER_LADDER = (0.0, 1e-10, 1e-8, 1e-6)

_LOG_2PI = np.log(2.0 * np.pi)


def se_kernel_matrix(X1, X2, lengthscale):
    """Squared-exponential kernel between the rows of ``X1`` and ``X2``.

    ``X2=None`` returns the symmetric Gram matrix of ``X1``.
    """
    if X2 is None:
        d2 = cdist(X1, X1, "sqeuclidean")
        K = np.exp(d2 * (-0.5 / (lengthscale * lengthscale)))
        # cdist is exact on the diagonal already; enforce symmetry bitwise
        K = np.triu(K) + np.triu(K, 1).T
        return K
    d2 = cdist(X1, X2, "sqeuclidean")
    return np.exp(d2 * (-0.5 / (lengthscale * lengthscale)))


def loo_objective(X, y, noise_weights, n_scored, lengthscale, noise_std):
    """Leave-one-out log pseudo-likelihood summed over the last ``n_scored`` rows.

    Rows must be ordered so that the scored rows come last; their diagonal
    of the inverse covariance is then the inverse of the trailing Schur
    complement, which costs ``n_scored**3`` instead of ``n**3``.
    Returns ``-inf`` if the covariance cannot be factorized.
    """
    n = X.shape[0]
    C = se_kernel_matrix(X, None, lengthscale)
    C[np.diag_indices(n)] += (noise_std * noise_std) * noise_weights
    scale = np.trace(C) / n
    for jitter in JITTER_LADDER:
        A = C
        if jitter > 0.0:
            A = C.copy()
            A[np.diag_indices(n)] += jitter * scale
        L, info = lapack.dpotrf(A, lower=1, clean=0)
        if info == 0:
            break
    else:
        return -np.inf
    alpha, info = lapack.dpotrs(L, y, lower=1)
    off = n - n_scored
    inv, info = lapack.dpotri(L[off:, off:], lower=1)
    d = np.diag(inv)
    if info != 0 or np.any(d <= 0.0):
        return -np.inf
    a = alpha[off:]
    return float(np.sum(-0.5 * (_LOG_2PI - np.log(d)) - 0.5 * a * a / d))
