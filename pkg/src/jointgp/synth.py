"""Damped-sine toy data: ``b + exp(-x) sin(2 pi x)`` plus Gaussian noise."""
from dataclasses import dataclass, replace

import numpy as np

from .dataset import LabeledDataset

__all__ = [
    "ToyConfig",
    "damped_sine",
    "generate_toy",
    "REAL_TOY",
    "SIMULATED_TOY",
    "TEST_TOY",
]


def damped_sine(x, b=0.0):
    x = np.asarray(x, dtype=np.float64)
    return b + np.exp(-x) * np.sin(2.0 * np.pi * x)


@dataclass(frozen=True)
class ToyConfig:
    bias: float = 0.0
    noise_std: float = 0.3
    lo: float = -0.6
    hi: float = 0.4
    count: int = 15
    seed: object = 0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"range must satisfy lo < hi, got [{self.lo}, {self.hi}]")
        if int(self.count) < 1:
            raise ValueError("count must be at least 1")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")

    def with_seed(self, seed):
        return replace(self, seed=seed)


REAL_TOY = ToyConfig()
SIMULATED_TOY = ToyConfig(lo=-1.0, hi=1.0, count=30)
TEST_TOY = ToyConfig(lo=-1.0, hi=1.0, count=200)


def generate_toy(config, source=0, latent=damped_sine):
    """Uniform inputs on ``[lo, hi]``, targets ``latent(x, bias) + noise``.

    ``seed`` may be an int or a tuple of ints; equal seeds give identical
    data. Inputs and noise are drawn from one stream, inputs first, so
    datasets differing only in bias or noise level share the same x and
    standardized noise.
    """
    rng = np.random.default_rng(config.seed)
    x = rng.uniform(config.lo, config.hi, size=int(config.count))
    z = rng.standard_normal(int(config.count))
    y = latent(x, config.bias) + config.noise_std * z
    return LabeledDataset(x[:, None], y, np.full(x.shape[0], source), ("x",))
