"""Hyperparameter fitting by leave-one-out pseudo-likelihood.

For a joint model only real rows enter the sum; plain GP baselines score
every training row. LOO predictive terms come from a single factorization
of the full noisy covariance C_n:

    mu_i = y_i - [C_n^{-1} y]_i / [C_n^{-1}]_ii,    s_i^2 = 1 / [C_n^{-1}]_ii
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import pdist

from ._backend import loo_objective
from .gp import Hyperparameters
from .jgp import validate_labels
from .kernel import as_input_matrix

__all__ = [
    "FitConfig",
    "FitError",
    "FitResult",
    "LooTerms",
    "fit_hyperparameters",
    "loo_terms",
    "optimize_pseudo_likelihood",
    "pseudo_log_likelihood",
]

MODEL_KINDS = ("gp", "jgp")


class FitError(RuntimeError):
    """Every optimizer start failed to produce a finite objective."""


@dataclass(frozen=True, eq=False)
class LooTerms:
    index: np.ndarray
    mean: np.ndarray
    variance: np.ndarray

    def __len__(self):
        return self.index.shape[0]


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings. ``budget`` caps objective evaluations per restart."""

    budget: int = 500
    restarts: int = 5
    lengthscale_bounds: tuple = (1e-2, 1e2)
    noise_bounds: tuple = (1e-4, 1e2)
    trust_bounds: tuple = (1e-6, 1e3)
    seed: int = 0
    xatol: float = 1e-3
    fatol: float = 1e-6
    simplex_step: float = 1.0

    def __post_init__(self):
        if int(self.budget) < 1:
            raise ValueError("budget must be at least 1")
        if int(self.restarts) < 1:
            raise ValueError("restarts must be at least 1")
        for name in ("lengthscale_bounds", "noise_bounds", "trust_bounds"):
            lo, hi = getattr(self, name)
            if not (0.0 < lo < hi < math.inf):
                raise ValueError(f"{name} must satisfy 0 < lower < upper < inf, got {(lo, hi)}")
            object.__setattr__(self, name, (float(lo), float(hi)))

    def log_bounds(self, n_sources):
        bounds = [self.lengthscale_bounds, self.noise_bounds] + [self.trust_bounds] * n_sources
        return np.log(np.array(bounds))


@dataclass(frozen=True)
class FitResult:
    hyperparameters: Hyperparameters
    objective: float
    evaluations: int
    restart_objectives: tuple = field(default=())


def _check_real_count(r):
    if r < 2:
        raise ValueError(
            f"leave-one-out pseudo-likelihood needs at least 2 real training points, got {r}"
        )


def loo_terms(model):
    """LOO predictive means and variances for the real rows of ``model``."""
    index = model.real_index
    _check_real_count(index.shape[0])
    n = model.n_train
    E = np.zeros((n, index.shape[0]))
    E[index, np.arange(index.shape[0])] = 1.0
    Z = solve_triangular(model.factor.lower, E, lower=True, check_finite=False)
    inv_diag = np.einsum("ij,ij->j", Z, Z)
    bad = np.flatnonzero(inv_diag <= 0.0)
    if bad.size:
        raise FloatingPointError(f"nonpositive inverse-covariance diagonal at training row {index[bad[0]]}")
    a = model.alpha[index]
    return LooTerms(index=index, mean=model.y[index] - a / inv_diag, variance=1.0 / inv_diag)


def pseudo_log_likelihood(model, terms=None):
    """Sum over real rows of log N(y_i; mu_i, s_i^2) with the LOO terms."""
    if terms is None:
        terms = loo_terms(model)
    resid = model.y[terms.index] - terms.mean
    return float(np.sum(-0.5 * np.log(2.0 * np.pi * terms.variance) - 0.5 * resid ** 2 / terms.variance))


def _initial_point(X, y_ref, n_sources, log_bounds):
    if X.shape[0] > 1:
        lengthscale = float(np.median(pdist(X)))
    else:
        lengthscale = 0.0
    if not lengthscale > 0.0:
        lengthscale = 1.0
    spread = float(np.std(y_ref))
    noise = 0.1 * spread if spread > 0.0 else 0.1
    theta = np.log([lengthscale, noise] + [1.0] * n_sources)
    return np.clip(theta, log_bounds[:, 0], log_bounds[:, 1])


def _simplex(x0, step, log_bounds):
    vertices = [x0]
    for k in range(x0.shape[0]):
        v = x0.copy()
        v[k] = x0[k] + step if x0[k] + step <= log_bounds[k, 1] else x0[k] - step
        vertices.append(v)
    return np.array(vertices)


def optimize_pseudo_likelihood(X, y, labels=None, config=None, model_kind="jgp"):
    """Maximize the LOO pseudo-likelihood with multi-start Nelder-Mead in log space.

    ``model_kind="gp"`` ignores ``labels`` and scores every row;
    ``"jgp"`` fits one trust value per simulated source and scores real rows only.
    Restart 0 starts from the median pairwise input distance, a tenth of the
    target spread and unit trust; the rest are log-uniform draws from the bounds.
    With simulated rows present, one extra start sits at the real-only optimum
    with every trust at its lower bound. The real-only model is the small-trust
    limit of the joint one, so the joint fit never scores worse than that nested
    solution.
    """
    config = config or FitConfig()
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"model_kind must be one of {MODEL_KINDS}, got {model_kind!r}")
    X = as_input_matrix(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = X.shape[0]
    if y.shape[0] != n:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]} entries")
    if model_kind == "gp":
        labels = np.zeros(n, dtype=np.int64)
        m = 0
    else:
        if labels is None:
            labels = np.zeros(n, dtype=np.int64)
        labels, m = validate_labels(labels, n)
    real = labels == 0
    r = int(real.sum())
    _check_real_count(r)

    # simulated rows first so the scored block is the trailing one
    order = np.concatenate((np.flatnonzero(~real), np.flatnonzero(real)))
    Xo = np.ascontiguousarray(X[order])
    yo = np.ascontiguousarray(y[order])
    lo = labels[order]

    log_bounds = config.log_bounds(m)

    def negative_objective(theta):
        gamma = np.exp(theta[2:])
        weights = np.concatenate(([1.0], 1.0 / gamma))[lo]
        value = loo_objective(Xo, yo, weights, r, math.exp(theta[0]), math.exp(theta[1]))
        return -value if np.isfinite(value) else np.inf

    rng = np.random.default_rng(config.seed)
    starts = [_initial_point(X, y[real], m, log_bounds)]
    for _ in range(1, config.restarts):
        starts.append(rng.uniform(log_bounds[:, 0], log_bounds[:, 1]))
    if m > 0 and r < n:
        nested = optimize_pseudo_likelihood(X[real], y[real], config=config, model_kind="gp")
        starts.append(np.concatenate((nested.hyperparameters.to_log_vector(), log_bounds[2:, 0])))

    best_theta, best_value, evaluations, objectives = None, -np.inf, 0, []
    for x0 in starts:
        res = minimize(
            negative_objective,
            x0,
            method="Nelder-Mead",
            bounds=log_bounds,
            options={
                "maxfev": int(config.budget),
                "xatol": config.xatol,
                "fatol": config.fatol,
                "initial_simplex": _simplex(x0, config.simplex_step, log_bounds),
            },
        )
        evaluations += int(res.nfev)
        value = -float(res.fun)
        objectives.append(value)
        # strict comparison keeps the lowest restart index on ties
        if np.isfinite(value) and value > best_value:
            best_theta, best_value = np.clip(res.x, log_bounds[:, 0], log_bounds[:, 1]), value
    if best_theta is None:
        raise FitError("all optimizer starts failed: covariance not positive definite at every start")
    return FitResult(
        hyperparameters=Hyperparameters.from_log_vector(best_theta),
        objective=best_value,
        evaluations=evaluations,
        restart_objectives=tuple(objectives),
    )


def fit_hyperparameters(X, y, labels=None, config=None, model_kind="jgp"):
    """Best hyperparameters found by :func:`optimize_pseudo_likelihood`."""
    return optimize_pseudo_likelihood(X, y, labels, config, model_kind).hyperparameters
