"""Joint Gaussian process regression for blending real and simulated data."""
from ._backend import BACKEND
from .dataset import DataError, LabeledDataset, ingest
from .gp import Hyperparameters, Prediction, TrainedModel, gp_fit, gp_predict
from .harness import CvPlan, ExperimentReport, SplitPlan, rmse, run_cv_sweep, run_extrapolation, run_toy_sweep
from .jgp import build_v, jgp_fit, jgp_predict
from .kernel import NotPositiveDefiniteError, build_kernel_matrix, factorize, se_kernel, solve
from .lsjgp import RidgeWeights, lsjgp_fit, lsjgp_predict
from .synth import ToyConfig, damped_sine, generate_toy
from .train import FitConfig, FitError, fit_hyperparameters, loo_terms, pseudo_log_likelihood

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CvPlan",
    "DataError",
    "ExperimentReport",
    "FitConfig",
    "FitError",
    "Hyperparameters",
    "LabeledDataset",
    "NotPositiveDefiniteError",
    "Prediction",
    "RidgeWeights",
    "SplitPlan",
    "ToyConfig",
    "TrainedModel",
    "build_kernel_matrix",
    "build_v",
    "damped_sine",
    "factorize",
    "fit_hyperparameters",
    "generate_toy",
    "gp_fit",
    "gp_predict",
    "ingest",
    "jgp_fit",
    "jgp_predict",
    "loo_terms",
    "lsjgp_fit",
    "lsjgp_predict",
    "pseudo_log_likelihood",
    "rmse",
    "run_cv_sweep",
    "run_extrapolation",
    "run_toy_sweep",
    "se_kernel",
    "solve",
]
