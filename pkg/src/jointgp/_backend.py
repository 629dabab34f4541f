"""Select the compiled core or the pure-Python fallback at import time."""
import os

import numpy as np

from . import _fallback

_core = None
if os.environ.get("JOINTGP_PURE_PYTHON", "") != "1":
    try:
        from . import _core
    except ImportError:  # extension not built
        _core = None

_impl = _core if _core is not None else _fallback
BACKEND = "compiled" if _core is not None else "python"


def se_kernel_matrix(X1, X2, lengthscale):
    X1 = np.ascontiguousarray(X1, dtype=np.float64)
    if X2 is not None:
        X2 = np.ascontiguousarray(X2, dtype=np.float64)
    return _impl.se_kernel_matrix(X1, X2, float(lengthscale))


def loo_objective(X, y, noise_weights, n_scored, lengthscale, noise_std):
    return _impl.loo_objective(
        np.ascontiguousarray(X, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(noise_weights, dtype=np.float64),
        int(n_scored),
        float(lengthscale),
        float(noise_std),
    )
