"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure. Errors are printed to stderr as one JSON line.
"""
import csv
import json
import os
import sys

import click
import numpy as np

from . import __version__
from .config import ConfigError, load_config
from .dataset import DataError, LabeledDataset, ingest
from .harness import CvPlan, SplitPlan, Standardizer, fit_method, run_cv_sweep, run_extrapolation, run_toy_sweep
from .jgp import jgp_fit
from .kernel import NotPositiveDefiniteError
from .train import FitError, pseudo_log_likelihood

EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 2, 3, 4


class CommandError(Exception):
    def __init__(self, kind, code, message):
        super().__init__(message)
        self.kind, self.code = kind, code


def _header(cfg):
    return f"jointgp {__version__} seed={cfg.seed} config_sha256={cfg.sha256()}"


def _write_csv(path, header, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {header}\n")
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        writer.writerows(rows)


def _require(cfg, *keys):
    missing = [f"{k}: required by this command" for k in keys if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(missing)


def _load(path):
    return ingest(path)


def _simulated(path, feature_names):
    data = ingest(path)
    if data.feature_names != feature_names:
        raise DataError(f"{path}: feature columns {list(data.feature_names)} differ from real data "
                        f"{list(feature_names)}")
    return data.relabel(np.where(data.source == 0, 1, data.source))


def _flag(value, default):
    return default if value is None else value


def _config(config, **overrides):
    return load_config(config, **overrides)


def _run(fn):
    try:
        fn()
    except ConfigError as exc:
        _fail("config", EXIT_CONFIG, str(exc))
    except (DataError, OSError) as exc:
        _fail("data", EXIT_DATA, str(exc))
    except (NotPositiveDefiniteError, FitError, FloatingPointError) as exc:
        _fail("numerical", EXIT_NUMERICAL, str(exc))
    except ValueError as exc:
        _fail("data", EXIT_DATA, str(exc))


def _fail(kind, code, message):
    click.echo(json.dumps({"error": kind, "code": code, "message": message}), err=True)
    sys.exit(code)


common = [
    click.option("--config", "config", type=click.Path(dir_okay=False), default=None, help="JSON run config."),
    click.option("--out", "out", type=click.Path(), required=True, help="Output path."),
    click.option("--seed", type=int, default=None, help="Overrides the config seed."),
    click.option("--threads", type=int, default=None, help="Worker processes (0 = one per CPU)."),
]


def with_common(fn):
    for option in reversed(common):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="jointgp")
def main():
    """Joint Gaussian process regression on real and simulated data."""


def _prepare(cfg, method):
    real = _load(cfg.real)
    sim = _simulated(cfg.simulated, real.feature_names) if cfg.simulated else None
    if method != "gp_r" and sim is None:
        raise ConfigError([f"simulated: required by method {method}"])
    standardize = _flag(cfg.standardize, True)
    center = _flag(cfg.center, True)
    scaler = Standardizer.from_rows(real.X) if standardize else Standardizer()
    return real, sim, scaler, center


def _fit_from(cfg, method, real, sim, scaler, center, hyperparameters=None):
    Xs = scaler(sim.X) if sim is not None else None
    ys = sim.y if sim is not None else None
    labels = sim.source if sim is not None else None
    return fit_method(method, scaler(real.X), real.y, Xs, ys, config=cfg.fit_config(), center=center,
                      hyperparameters=hyperparameters, sim_labels=labels)


@main.command()
@with_common
@click.option("--method", default=None, help="Method to fit (default: first configured method).")
@click.option("--real", default=None, type=click.Path(), help="Real dataset CSV.")
@click.option("--simulated", default=None, type=click.Path(), help="Simulated dataset CSV.")
def fit(config, out, seed, threads, method, real, simulated):
    """Fit one method and write its hyperparameters as JSON."""
    def run():
        cfg = _config(config, seed=seed, threads=threads, real=real, simulated=simulated,
                      methods=[method] if method else None)
        _require(cfg, "real")
        name = cfg.methods[0]
        data, sim, scaler, center = _prepare(cfg, name)
        fitted = _fit_from(cfg, name, data, sim, scaler, center)
        hp = fitted.hyperparameters
        if fitted.model is not None:
            pll = pseudo_log_likelihood(fitted.model)
        else:
            labels = np.concatenate((np.zeros(len(data), dtype=np.int64), sim.source))
            pll = pseudo_log_likelihood(jgp_fit(fitted.X, np.concatenate((data.y, sim.y)) - fitted.offset,
                                                labels, hp))
        summary = {
            "format": "jointgp-model",
            "version": __version__,
            "method": name,
            "hyperparameters": hp.to_dict(),
            "pseudo_log_likelihood": pll,
            "offset": fitted.offset,
            "standardization": scaler.to_dict(),
            "centering": center,
            "data": {"real": cfg.real, "simulated": cfg.simulated},
            "n_train": int(fitted.X.shape[0]),
            "feature_names": list(data.feature_names),
            "seed": cfg.seed,
            "config_sha256": cfg.sha256(),
        }
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    _run(run)


def _read_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            summary = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError([f"model: cannot read {path}: {exc}"]) from None
    if summary.get("format") != "jointgp-model":
        raise ConfigError([f"model: {path} is not a jointgp model summary"])
    return summary


@main.command()
@with_common
@click.option("--model", "model_path", default=None, type=click.Path(), help="Model JSON written by fit.")
@click.option("--test", "test_path", default=None, type=click.Path(), help="CSV of inputs to predict.")
def predict(config, out, seed, threads, model_path, test_path):
    """Refit a saved model deterministically and predict a CSV of inputs."""
    from .gp import Hyperparameters

    def run():
        cfg = _config(config, seed=seed, threads=threads, model=model_path, test=test_path)
        _require(cfg, "model", "test")
        summary = _read_model(cfg.model)
        hp = Hyperparameters(**summary["hyperparameters"])
        real = _load(summary["data"]["real"])
        sim_path = summary["data"]["simulated"]
        sim = _simulated(sim_path, real.feature_names) if sim_path else None
        std = summary["standardization"]
        scaler = Standardizer(np.array(std["mean"]), np.array(std["scale"])) if std else Standardizer()
        fitted = _fit_from(cfg, summary["method"], real, sim, scaler, summary["centering"], hyperparameters=hp)
        test = ingest(cfg.test, require_target=False)
        if test.feature_names != real.feature_names:
            raise DataError(f"{cfg.test}: feature columns {list(test.feature_names)} differ from training "
                            f"{list(real.feature_names)}")
        Xt = scaler(test.X)
        if fitted.model is not None:
            mean, variance = fitted.predict_full(Xt)
        else:
            mean, variance = fitted.predict(Xt), np.full(len(test), np.nan)
        rows = [{"mean": repr(float(m)), "variance": repr(float(v))} for m, v in zip(mean, variance)]
        _write_csv(out, _header(cfg), ["mean", "variance"], rows)
    _run(run)


@main.command("cv-sweep")
@with_common
def cv_sweep(config, out, seed, threads):
    """Repeated k-fold CV over simulated-to-real ratios."""
    def run():
        cfg = _config(config, seed=seed, threads=threads)
        _require(cfg, "real", "simulated")
        real = _load(cfg.real)
        sim = _simulated(cfg.simulated, real.feature_names)
        plan = CvPlan(folds=cfg.folds, ratios=tuple(cfg.ratios), repetitions=cfg.repetitions, seed=cfg.seed)
        report = run_cv_sweep(real, sim, plan, cfg.methods, cfg.fit_config(), standardize=_flag(cfg.standardize, True),
                              center=_flag(cfg.center, True), threads=cfg.threads)
        rows = report.rows()
        _write_csv(out, _header(cfg), list(rows[0]), rows)
    _run(run)


@main.command()
@with_common
def extrapolate(config, out, seed, threads):
    """Quantile split on the green band: train below, test above."""
    def run():
        cfg = _config(config, seed=seed, threads=threads)
        _require(cfg, "real", "simulated")
        real = _load(cfg.real)
        sim = _simulated(cfg.simulated, real.feature_names)
        plan = SplitPlan(feature=cfg.split_feature, quantile=cfg.quantile)
        report = run_extrapolation(real, sim, plan, cfg.methods, cfg.fit_config(), p=cfg.ratio, seed=cfg.seed,
                                   standardize=_flag(cfg.standardize, True), center=_flag(cfg.center, True))
        rows = report.rows()
        _write_csv(out, _header(cfg), list(rows[0]), rows)
    _run(run)


@main.command("toy-sweep")
@with_common
def toy_sweep(config, out, seed, threads):
    """Damped-sine robustness sweep over simulated bias and noise."""
    def run():
        cfg = _config(config, seed=seed, threads=threads)
        counts = (cfg.counts["real"], cfg.counts["simulated"], cfg.counts["test"])
        report = run_toy_sweep(cfg.bias_grid, cfg.sigma_grid, cfg.methods, cfg.repetitions, cfg.fit_config(),
                               seed=cfg.seed, counts=counts, center=_flag(cfg.center, False), threads=cfg.threads)
        rows = report.rows()
        _write_csv(out, _header(cfg), list(rows[0]), rows)
    _run(run)


def _greenness(data):
    names = [n.lower() for n in data.feature_names]
    if "nir" in names and "r" in names:
        nir, red = data.X[:, names.index("nir")], data.X[:, names.index("r")]
        with np.errstate(divide="ignore", invalid="ignore"):
            return (nir - red) / (nir + red), "ndvi"
    for candidate in ("g", "green"):
        if candidate in names:
            return data.X[:, names.index(candidate)], data.feature_names[names.index(candidate)]
    return data.X[:, 0], data.feature_names[0]


def _describe(data):
    return {
        "rows": len(data),
        "features": len(data.feature_names),
        "source_counts": {str(k): v for k, v in data.source_counts().items()},
        "columns": {
            name: {"mean": float(data.X[:, j].mean()), "std": float(data.X[:, j].std(ddof=1)) if len(data) > 1 else 0.0}
            for j, name in enumerate(data.feature_names)
        } | {"target": {"mean": float(data.y.mean()), "std": float(data.y.std(ddof=1)) if len(data) > 1 else 0.0}},
    }


@main.command("data-summary")
@with_common
def data_summary(config, out, seed, threads):
    """Per-source counts, column statistics and greenness-vs-target CSVs (``--out`` is a directory)."""
    def run():
        cfg = _config(config, seed=seed, threads=threads)
        _require(cfg, "real")
        os.makedirs(out, exist_ok=True)
        datasets = {"real": _load(cfg.real)}
        if cfg.simulated:
            datasets["simulated"] = _simulated(cfg.simulated, datasets["real"].feature_names)
        summary = {"version": __version__, "config_sha256": cfg.sha256()}
        for name, data in datasets.items():
            green, green_name = _greenness(data)
            summary[name] = _describe(data) | {"greenness": green_name}
            rows = [{"greenness": repr(float(g)), "target": repr(float(t))} for g, t in zip(green, data.y)]
            _write_csv(os.path.join(out, f"greenness_{name}.csv"), _header(cfg), ["greenness", "target"], rows)
        with open(os.path.join(out, "summary.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    _run(run)


if __name__ == "__main__":
    main()
