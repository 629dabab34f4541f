"""Labelled datasets and their CSV representation.

Files have a header row, one or more feature columns, a ``target`` column
and an optional integer ``source`` column (0 = real, k >= 1 = simulated
source k; absent means every row is real). Lines starting with ``#`` are
comments.
"""
import csv
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["DataError", "LabeledDataset", "ingest", "write_dataset"]


class DataError(ValueError):
    """A dataset file violates the expected schema."""


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    source: np.ndarray
    feature_names: tuple = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(self.y, dtype=np.float64).reshape(-1)
        source = np.broadcast_to(np.asarray(self.source, dtype=np.int64), y.shape).copy()
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]} entries")
        names = tuple(self.feature_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "feature_names", names)

    def __len__(self):
        return self.y.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    def source_counts(self):
        values, counts = np.unique(self.source, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}

    def subset(self, index):
        index = np.asarray(index)
        return LabeledDataset(self.X[index], self.y[index], self.source[index], self.feature_names)

    def relabel(self, source):
        return LabeledDataset(self.X, self.y, source, self.feature_names)

    def to_csv(self, path, comment=None):
        write_dataset(self, path, comment)


TARGET_ALIASES = ("lai",)


def _parse_float(text, row, column):
    if text is None or text.strip() == "":
        raise DataError(f"row {row}, column '{column}': missing value")
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"row {row}, column '{column}': not a number") from None
    if not math.isfinite(value):
        raise DataError(f"row {row}, column '{column}': not a finite number")
    return value


def ingest(path, require_target=True):
    """Read a dataset CSV, preserving row order.

    The target column is ``target``; a column named ``LAI`` (any case) is
    accepted in its place. Error messages use 1-based file line numbers
    (the header is row 1).
    With ``require_target=False`` a file without a ``target`` column is
    accepted and its targets are NaN.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [(i, line) for i, line in enumerate(fh, start=1) if not line.lstrip().startswith("#")]
    lines = [(i, line) for i, line in lines if line.strip()]
    if not lines:
        raise DataError(f"{path}: empty file")
    rows = list(csv.reader([line for _, line in lines]))
    line_numbers = [i for i, _ in lines]
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names in header")
    if "target" not in header:
        alias = [h for h in header if h.lower() in TARGET_ALIASES]
        if len(alias) == 1:
            header[header.index(alias[0])] = "target"
    has_target = "target" in header
    if require_target and not has_target:
        raise DataError(f"{path}: header has no 'target' column")
    features = [h for h in header if h not in ("target", "source")]
    if not features:
        raise DataError(f"{path}: no feature columns")
    if len(rows) < 2:
        raise DataError(f"{path}: no data rows")
    col = {h: j for j, h in enumerate(header)}
    X = np.empty((len(rows) - 1, len(features)))
    y = np.empty(len(rows) - 1)
    source = np.zeros(len(rows) - 1, dtype=np.int64)
    for k, (lineno, row) in enumerate(zip(line_numbers[1:], rows[1:])):
        if len(row) != len(header):
            raise DataError(f"row {lineno}: expected {len(header)} cells, found {len(row)}")
        for j, name in enumerate(features):
            X[k, j] = _parse_float(row[col[name]], lineno, name)
        y[k] = _parse_float(row[col["target"]], lineno, "target") if has_target else np.nan
        if "source" in col:
            value = _parse_float(row[col["source"]], lineno, "source")
            if value != int(value) or value < 0:
                raise DataError(f"row {lineno}, column 'source': not a nonnegative integer")
            source[k] = int(value)
    return LabeledDataset(X, y, source, tuple(features))


def write_dataset(dataset, path, comment=None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow([*dataset.feature_names, "target", "source"])
        for x, t, s in zip(dataset.X, dataset.y, dataset.source):
            writer.writerow([*(repr(float(v)) for v in x), repr(float(t)), int(s)])
