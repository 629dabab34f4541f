import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_kernel(X1, X2, lengthscale):
    """Entrywise double loop over the scalar kernel formula."""
    out = np.empty((X1.shape[0], X2.shape[0]))
    for i in range(X1.shape[0]):
        for j in range(X2.shape[0]):
            d = X1[i] - X2[j]
            out[i, j] = np.exp(-np.dot(d, d) / (2.0 * lengthscale ** 2))
    return out


def gauss_solve(A, b):
    """Dense Gaussian elimination with partial pivoting (no LAPACK)."""
    A = np.array(A, dtype=np.float64)
    b = np.array(b, dtype=np.float64).reshape(A.shape[0], -1)
    n = A.shape[0]
    M = np.hstack([A, b])
    for k in range(n):
        p = k + int(np.argmax(np.abs(M[k:, k])))
        M[[k, p]] = M[[p, k]]
        for i in range(k + 1, n):
            M[i, k:] -= M[i, k] / M[k, k] * M[k, k:]
    x = np.zeros_like(b)
    for i in range(n - 1, -1, -1):
        x[i] = (M[i, n:] - M[i, i + 1:n] @ x[i + 1:]) / M[i, i]
    return x.reshape(-1) if x.shape[1] == 1 else x


def conditional_gaussian(X, y, noise_var, xstar, lengthscale, noise_std):
    """Condition the joint (n+1)-dim Gaussian of (y, y*) by the block formula.

    ``noise_var`` holds the per-row observation noise variances.
    """
    Z = np.vstack([X, xstar[None, :]])
    S = brute_kernel(Z, Z, lengthscale)
    n = X.shape[0]
    S[np.arange(n), np.arange(n)] += noise_var
    S[n, n] += noise_std ** 2
    Saa, Sab, Sbb = S[:n, :n], S[:n, n], S[n, n]
    w = gauss_solve(Saa, Sab)
    return w @ y, Sbb - Sab @ w


def brute_loo(X, y, labels, lengthscale, noise_std, trust=()):
    """Delete each real row, rebuild the noise weights, refit, predict it."""
    inv = np.concatenate(([1.0], 1.0 / np.asarray(trust, dtype=float)))
    noise_var = noise_std ** 2 * inv[labels]
    means, variances = [], []
    for i in np.flatnonzero(labels == 0):
        keep = np.arange(X.shape[0]) != i
        mu, var = conditional_gaussian(X[keep], y[keep], noise_var[keep], X[i], lengthscale, noise_std)
        means.append(mu)
        variances.append(var)
    return np.array(means), np.array(variances)


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        _CRITERIA[number] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        passed, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
