"""Shared domain types: series, lag embeddings, weight vectors, and losses.

Indices are 0-based internally; file formats and reports are 1-based.
All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class DbfError(Exception):
    """Base class for every error raised by this library."""


class NonFiniteData(DbfError):
    """Input contains NaN or infinite entries."""


class SeriesTooShort(DbfError):
    """Series has too few observations for the requested operation."""


class LengthMismatch(DbfError):
    """Two aligned vectors have different lengths."""


class DimensionMismatch(DbfError):
    """Array has the wrong shape or dimensionality."""


class BadWindow(DbfError):
    """Window size is zero or exceeds the available range."""


class NotPSD(DbfError):
    """Matrix expected to be positive semi-definite is not."""


class NumericalFailure(DbfError):
    """A numerical routine failed in a way that signals a bug, not bad data."""


class SingularSystem(DbfError):
    """Linear system is rank-deficient and no regularization was supplied."""


class DegenerateSample(DbfError):
    """Sample statistics are degenerate (e.g. zero variance)."""


class DataFormatError(DbfError):
    """A file could not be parsed in the expected format."""


def _as_finite_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DimensionMismatch(f"{name}: expected {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteData(f"{name}: contains NaN or Inf")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TimeSeries:
    """Univariate series y_1..y_T.

    ``values[i]`` is the observation at time ``origin_index + i``; the default
    origin of 1 matches the 1-based time convention used in reports.
    """

    values: np.ndarray
    origin_index: int = 1

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1:
            raise DimensionMismatch(f"TimeSeries: expected 1-d values, got shape {arr.shape}")
        if arr.size < 1:
            raise SeriesTooShort("TimeSeries: needs at least one observation")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteData("TimeSeries: contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class RegressionDataset:
    """Lagged regression pairs (x_t, y_t) with x_t a row of ``lag`` past values."""

    features: np.ndarray  # (T', m)
    targets: np.ndarray  # (T',)
    lag: int

    def __post_init__(self):
        feats = _as_finite_array(self.features, 2, "features")
        targs = _as_finite_array(self.targets, 1, "targets")
        if feats.shape[0] != targs.shape[0]:
            raise LengthMismatch(
                f"features rows {feats.shape[0]} != targets length {targs.shape[0]}"
            )
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "targets", targs)

    def __len__(self) -> int:
        return int(self.targets.size)


@dataclass(frozen=True)
class WeightVector:
    """Weights over sample points: q, the prior v, or the proxy p.

    When ``simplex`` is set the entries must be non-negative and sum to 1
    within 1e-9.
    """

    weights: np.ndarray
    simplex: bool = False

    def __post_init__(self):
        arr = _as_finite_array(self.weights, 1, "weights")
        if self.simplex:
            if np.any(arr < 0):
                raise ValueError("simplex-flagged weights must be non-negative")
            if abs(float(arr.sum()) - 1.0) > 1e-9:
                raise ValueError("simplex-flagged weights must sum to 1 within 1e-9")
        object.__setattr__(self, "weights", arr)

    def __len__(self) -> int:
        return int(self.weights.size)


@dataclass(frozen=True)
class LossKind:
    """Loss selector; only the squared error is implemented.

    ``bound`` records the |f| <= M reporting constant and never enters any
    computation.
    """

    kind: str = "squared_error"
    bound: float | None = None

    def __post_init__(self):
        if self.kind != "squared_error":
            raise ValueError(f"unsupported loss kind: {self.kind!r}")
        if self.bound is not None and not self.bound > 0:
            raise ValueError("loss bound must be positive when given")

    def evaluate(self, predictions: np.ndarray, targets: np.ndarray) -> np.ndarray:
        return (np.asarray(predictions, dtype=float) - np.asarray(targets, dtype=float)) ** 2


SQUARED_ERROR = LossKind()


def embed_lags(series: TimeSeries, lag: int) -> RegressionDataset:
    """Embed a series into lagged feature rows.

    Parameters
    ----------
    series : TimeSeries
        Source observations y_1..y_T.
    lag : int
        Number of past values per feature row; must be >= 1.

    Returns
    -------
    RegressionDataset
        T - lag rows; row t is (y_{t+1}, ..., y_{t+lag}) with target
        y_{t+lag+1} in 1-based time, i.e. features[t] = values[t:t+lag] and
        targets[t] = values[t+lag] over the 0-based source.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    n = len(series)
    if n <= lag:
        raise SeriesTooShort(f"series length {n} must exceed lag {lag}")
    vals = series.values
    windows = np.lib.stride_tricks.sliding_window_view(vals, lag)[: n - lag]
    return RegressionDataset(features=windows.copy(), targets=vals[lag:].copy(), lag=lag)


def weighted_empirical_loss(
    data: RegressionDataset,
    predictions: np.ndarray,
    q: WeightVector,
    loss: LossKind = SQUARED_ERROR,
) -> float:
    """Return sum_t q_t L(pred_t, y_t), summed exactly in time order."""
    preds = np.asarray(predictions, dtype=float)
    if preds.ndim != 1 or preds.size != len(data):
        raise LengthMismatch(f"predictions length {preds.size} != rows {len(data)}")
    if len(q) != len(data):
        raise LengthMismatch(f"weights length {len(q)} != rows {len(data)}")
    terms = q.weights * loss.evaluate(preds, data.targets)
    # fsum keeps the total exact regardless of term magnitudes
    return math.fsum(terms.tolist())
