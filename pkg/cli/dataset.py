"""CSV dataset loading: header detection, missing-value checks, label mapping, centering."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from engine.errors import DatasetError, InvalidParameterError
from engine.logistic_core import to_pm1_labels
from utils.logger import logger

MAX_REPORTED_CELLS = 5


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric design, +/-1 labels and column names of a CSV file."""

    X: np.ndarray
    y: np.ndarray
    names: list[str]
    label_name: str
    means: np.ndarray

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def column_index(self, name: str) -> int:
        """Index of a covariate given by name or 0-based position."""
        if name in self.names:
            return self.names.index(name)
        if name.lstrip("-").isdigit() and 0 <= int(name) < self.p:
            return int(name)
        raise DatasetError(f"unknown variable {name!r}; columns are {self.names}")


def _has_header(path: Path) -> bool:
    first = pd.read_csv(path, header=None, nrows=1, dtype=str, skipinitialspace=True)
    values = first.iloc[0].dropna()
    return bool(pd.to_numeric(values, errors="coerce").isna().any())


def _cells(mask: pd.DataFrame, header_offset: int) -> str:
    rows, cols = np.nonzero(mask.to_numpy())
    shown = [
        f"row {r + 1 + header_offset} column {mask.columns[c]!r}"
        for r, c in list(zip(rows, cols))[:MAX_REPORTED_CELLS]
    ]
    more = "" if rows.size <= MAX_REPORTED_CELLS else f" (+{rows.size - MAX_REPORTED_CELLS} more)"
    return ", ".join(shown) + more


def load_dataset(path: str | Path, label_col: Optional[str] = None, center: bool = True) -> Dataset:
    """
    Read a comma-separated dataset.

    Args:
        path: CSV file; a single header row is auto-detected
        label_col: Label column name or 0-based index (default: last column)
        center: Subtract column means from the covariates

    Returns:
        Dataset
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset not found: {path}")

    header = _has_header(path)
    frame = pd.read_csv(path, header=0 if header else None, skipinitialspace=True)
    frame.columns = [str(c) for c in frame.columns]
    if frame.shape[1] < 2:
        raise DatasetError("dataset needs at least one covariate and a label column")

    offset = 1 if header else 0
    missing = frame.isna()
    if missing.any().any():
        raise DatasetError(f"{int(missing.to_numpy().sum())} missing values: {_cells(missing, offset)}")

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = numeric.isna()
    if bad.any().any():
        raise DatasetError(f"non-numeric values: {_cells(bad, offset)}")

    columns = list(numeric.columns)
    if label_col is None:
        label = columns[-1]
    elif label_col in columns:
        label = label_col
    elif label_col.isdigit() and int(label_col) < len(columns):
        label = columns[int(label_col)]
    else:
        raise DatasetError(f"label column {label_col!r} not found; columns are {columns}")

    try:
        y = to_pm1_labels(numeric[label].to_numpy())
    except InvalidParameterError as exc:
        raise DatasetError(f"label column {label!r}: {exc}") from exc

    features = numeric.drop(columns=[label])
    X = features.to_numpy(dtype=float)
    n, p = X.shape
    if n <= p:
        raise DatasetError(f"need more rows than covariates, got n={n}, p={p}")

    means = X.mean(axis=0) if center else np.zeros(p)
    X = X - means
    logger.info(f"Loaded {path.name}: n={n}, p={p}, label={label!r}, centered={center}")
    return Dataset(X=X, y=y, names=list(features.columns), label_name=label, means=means)
