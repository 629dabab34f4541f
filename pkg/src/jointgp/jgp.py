"""Joint GP: source-weighted noise covariance ``C_n = K + noise_std^2 V``.

Rows labelled 0 are real; rows labelled k >= 1 belong to simulated source
k and get noise variance ``noise_std^2 / trust[k-1]``. One simulated
source is the usual real/simulated setting; several are supported.
"""
import numpy as np

from .gp import fit_weighted, gp_predict

__all__ = ["validate_labels", "build_v", "jgp_fit", "jgp_predict"]


def validate_labels(labels, n=None):
    """Return labels as an int array and the number of simulated sources.

    Labels must be contiguous: every source 1..m has at least one row.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be one-dimensional")
    if labels.size and not np.all(np.equal(np.mod(labels, 1), 0)):
        raise ValueError("labels must be integers")
    labels = labels.astype(np.int64)
    if n is not None and labels.shape[0] != n:
        raise ValueError(f"expected {n} labels, got {labels.shape[0]}")
    if labels.size and labels.min() < 0:
        raise ValueError("labels must be nonnegative (0 = real, k >= 1 = simulated source k)")
    m = int(labels.max()) if labels.size else 0
    present = np.unique(labels[labels > 0])
    if present.size != m:
        missing = sorted(set(range(1, m + 1)) - set(present.tolist()))
        raise ValueError(f"source labels must be contiguous; no rows for source(s) {missing}")
    return labels, m


def build_v(labels, trust):
    """Diagonal of V: 1 for real rows, 1/trust[k-1] for rows of source k."""
    labels, m = validate_labels(labels)
    trust = np.atleast_1d(np.asarray(trust, dtype=np.float64))
    if trust.shape[0] != m:
        raise ValueError(f"labels declare {m} simulated source(s) but {trust.shape[0]} trust value(s) given")
    if np.any(~np.isfinite(trust)) or np.any(trust <= 0.0):
        raise ValueError("trust values must be positive and finite")
    inv = np.concatenate(([1.0], 1.0 / trust))
    return inv[labels]


def jgp_fit(X, y, labels, hp):
    """Fit the joint GP with per-source trust ``hp.trust``."""
    labels, _ = validate_labels(labels, np.shape(y)[0])
    return fit_weighted(X, y, labels, hp, build_v(labels, hp.trust))


def jgp_predict(model, Xstar):
    """Same predictive equations as the plain GP, with ``c* = 1 + noise_std^2``."""
    return gp_predict(model, Xstar)
