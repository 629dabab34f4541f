"""JSON run configuration shared by the CLI commands."""
import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, fields

from .harness import canonical_method
from .train import FitConfig

__all__ = ["ConfigError", "RunConfig", "load_config"]

PATH_KEYS = ("real", "simulated", "test", "model")


class ConfigError(ValueError):
    """Invalid run configuration; ``problems`` lists every violation."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class RunConfig:
    methods: list = field(default_factory=lambda: ["gp_r", "gp_s", "gp_rs", "jgp"])
    real: str = None
    simulated: str = None
    test: str = None
    model: str = None
    folds: int = 10
    ratios: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0, 8.0])
    repetitions: int = 50
    quantile: float = 0.5
    split_feature: object = None
    ratio: float = 1.0
    bias_grid: list = field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0])
    sigma_grid: list = field(default_factory=lambda: [0.1, 0.3, 0.6, 1.2])
    counts: dict = field(default_factory=lambda: {"real": 15, "simulated": 30, "test": 200})
    budget: int = 500
    restarts: int = 5
    bounds: dict = field(default_factory=lambda: {
        "lengthscale": [1e-2, 1e2], "noise_std": [1e-4, 1e2], "trust": [1e-6, 1e3]})
    seed: int = 0
    standardize: bool = None
    center: bool = None
    threads: int = 1

    def fit_config(self):
        return FitConfig(
            budget=self.budget,
            restarts=self.restarts,
            lengthscale_bounds=tuple(self.bounds["lengthscale"]),
            noise_bounds=tuple(self.bounds["noise_std"]),
            trust_bounds=tuple(self.bounds["trust"]),
            seed=self.seed,
        )

    def sha256(self):
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _validate(cfg):
    problems = []
    if not isinstance(cfg.methods, list) or not cfg.methods:
        problems.append("methods: must be a non-empty list")
    else:
        for m in cfg.methods:
            try:
                canonical_method(m)
            except ValueError as exc:
                problems.append(f"methods: {exc}")
    for key in PATH_KEYS:
        value = getattr(cfg, key)
        if value is not None and not (isinstance(value, str) and os.path.exists(value)):
            problems.append(f"{key}: path does not exist: {value}")
    for key, minimum in (("folds", 2), ("repetitions", 1), ("budget", 1), ("restarts", 1), ("threads", 0)):
        value = getattr(cfg, key)
        if not _is_int(value) or value < minimum:
            problems.append(f"{key}: must be an integer >= {minimum}, got {value!r}")
    if not _is_int(cfg.seed) or cfg.seed < 0:
        problems.append(f"seed: must be a nonnegative integer, got {cfg.seed!r}")
    for key in ("ratios", "bias_grid", "sigma_grid"):
        value = getattr(cfg, key)
        if not isinstance(value, list) or not value or not all(_is_number(v) for v in value):
            problems.append(f"{key}: must be a non-empty list of numbers")
        elif key != "bias_grid" and any(v < 0 for v in value):
            problems.append(f"{key}: values must be nonnegative")
    if not _is_number(cfg.quantile) or not 0 < cfg.quantile < 1:
        problems.append(f"quantile: must lie in (0, 1), got {cfg.quantile!r}")
    if not _is_number(cfg.ratio) or cfg.ratio < 0:
        problems.append(f"ratio: must be a nonnegative number, got {cfg.ratio!r}")
    if cfg.split_feature is not None and not isinstance(cfg.split_feature, (str, int)):
        problems.append("split_feature: must be a column name or index")
    if not isinstance(cfg.counts, dict) or set(cfg.counts) != {"real", "simulated", "test"} or not all(
            _is_int(v) and v >= 1 for v in cfg.counts.values()):
        problems.append("counts: must map real/simulated/test to positive integers")
    if not isinstance(cfg.bounds, dict) or set(cfg.bounds) != {"lengthscale", "noise_std", "trust"}:
        problems.append("bounds: must have exactly the keys lengthscale, noise_std, trust")
    else:
        for name, pair in cfg.bounds.items():
            if (not isinstance(pair, list) or len(pair) != 2 or not all(_is_number(v) for v in pair)
                    or not 0 < pair[0] < pair[1]):
                problems.append(f"bounds.{name}: must be [lower, upper] with 0 < lower < upper")
    for key in ("standardize", "center"):
        value = getattr(cfg, key)
        if value is not None and not isinstance(value, bool):
            problems.append(f"{key}: must be true or false")
    return problems


def load_config(path=None, **overrides):
    """Parse and validate a JSON config; ``overrides`` with value None are ignored.

    Relative data paths are resolved against the config file's directory.
    All violations are collected before raising :class:`ConfigError`.
    """
    data = {}
    problems = []
    base = os.getcwd()
    if path is not None:
        base = os.path.dirname(os.path.abspath(path))
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError([f"cannot read config {path}: {exc.strerror}"]) from None
        except json.JSONDecodeError as exc:
            raise ConfigError([f"config {path} is not valid JSON: {exc}"]) from None
        if not isinstance(data, dict):
            raise ConfigError(["config must be a JSON object"])
    known = {f.name for f in fields(RunConfig)}
    problems.extend(f"unknown key: {key}" for key in sorted(set(data) - known))
    data = {k: v for k, v in data.items() if k in known}
    data.update({k: v for k, v in overrides.items() if v is not None})
    for key in PATH_KEYS:
        if isinstance(data.get(key), str) and not os.path.isabs(data[key]):
            data[key] = os.path.normpath(os.path.join(base, data[key]))
    cfg = RunConfig(**data)
    problems.extend(_validate(cfg))
    if problems:
        raise ConfigError(problems)
    cfg.methods = [canonical_method(m) for m in cfg.methods]
    return cfg
