"""Time-series container, max-min scaling, chronological splits and lag matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .errors import ConfigError, DataError, SizingError

DEFAULT_ORDER = 48
DEFAULT_SAMPLING_PERIOD = timedelta(minutes=30)


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled load observations.

    ``values`` is stored as a read-only float array. ``timestamps`` is optional;
    when given it must be strictly increasing with constant spacing equal to
    ``sampling_period``.
    """

    values: np.ndarray
    timestamps: Optional[tuple] = None
    sampling_period: timedelta = DEFAULT_SAMPLING_PERIOD

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError(f"series must be one-dimensional, got shape {values.shape}")
        if values.size < 1:
            raise SizingError("series must contain at least one observation")
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise DataError(f"series contains non-finite values at index {int(bad[0])}")
        object.__setattr__(self, "values", _frozen(values))
        if self.timestamps is not None:
            ts = tuple(self.timestamps)
            if len(ts) != values.size:
                raise DataError(
                    f"{len(ts)} timestamps for {values.size} values"
                )
            for i in range(1, len(ts)):
                step = ts[i] - ts[i - 1]
                if step != self.sampling_period:
                    raise DataError(
                        f"timestamp spacing {step} at index {i} differs from "
                        f"sampling period {self.sampling_period}"
                    )
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and self.timestamps == other.timestamps
            and self.sampling_period == other.sampling_period
        )

    def slice(self, start: int, stop: int) -> "TimeSeries":
        ts = None if self.timestamps is None else self.timestamps[start:stop]
        return TimeSeries(self.values[start:stop], ts, self.sampling_period)

    def with_values(self, values) -> "TimeSeries":
        return TimeSeries(values, self.timestamps, self.sampling_period)


@dataclass(frozen=True)
class NormalizationParams:
    x_min: float
    x_max: float

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise ConfigError("normalization bounds must be finite")
        if not self.x_max > self.x_min:
            raise ConfigError(
                f"degenerate normalization: x_max ({self.x_max}) must exceed x_min ({self.x_min})"
            )

    @classmethod
    def fit(cls, train: TimeSeries) -> "NormalizationParams":
        """Bounds taken from the training segment only."""
        return cls(float(train.values.min()), float(train.values.max()))

    @property
    def span(self) -> float:
        return self.x_max - self.x_min


def normalize(series: TimeSeries, params: NormalizationParams) -> TimeSeries:
    """Map ``series`` with ``(x - x_min) / (x_max - x_min)``.

    Values outside the training range map outside ``[0, 1]``; they are not clipped.
    """
    return series.with_values((series.values - params.x_min) / params.span)


def denormalize(series: TimeSeries, params: NormalizationParams) -> TimeSeries:
    return series.with_values(denormalize_array(series.values, params))


def denormalize_array(values, params: NormalizationParams) -> np.ndarray:
    return np.asarray(values, dtype=float) * params.span + params.x_min


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    valid_fraction: float = 0.1
    test_fraction: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not 0.0 <= self.valid_fraction < 1.0:
            raise ConfigError(f"valid_fraction must lie in [0, 1), got {self.valid_fraction}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        total = self.train_fraction + self.valid_fraction + self.test_fraction
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"split fractions sum to {total}, expected 1")

    def lengths(self, n: int) -> tuple[int, int, int]:
        """Segment lengths for a series of ``n`` points; the remainder goes to training."""
        # the epsilon guards against 0.29 * 100 == 28.999999999999996
        n_valid = int(math.floor(self.valid_fraction * n + 1e-9))
        n_test = int(math.floor(self.test_fraction * n + 1e-9))
        n_train = n - n_valid - n_test
        if n_train < 1 or n_test < 1 or (self.valid_fraction > 0 and n_valid < 1):
            raise SizingError(
                f"series of length {n} is too short for split "
                f"{self.train_fraction}/{self.valid_fraction}/{self.test_fraction}"
            )
        return n_train, n_valid, n_test


def split(series: TimeSeries, spec: SplitSpec = SplitSpec()):
    """Chronological train / validation / test partition.

    The validation segment is ``None`` when ``valid_fraction`` is 0.
    """
    n_train, n_valid, _ = spec.lengths(len(series))
    a, b = n_train, n_train + n_valid
    valid = series.slice(a, b) if n_valid else None
    return series.slice(0, a), valid, series.slice(b, len(series))


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Supervised view of a series.

    ``target_index[i]`` is the position in the source series of ``targets[i]``;
    every input in row ``i`` comes from strictly earlier positions.
    """

    inputs: np.ndarray
    targets: np.ndarray
    order: int
    feature_layout: tuple
    target_index: np.ndarray = field(default=None)

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if inputs.ndim != 2 or targets.ndim != 1 or inputs.shape[0] != targets.size:
            raise DataError(
                f"inputs {inputs.shape} and targets {targets.shape} are not aligned"
            )
        if len(self.feature_layout) != inputs.shape[1]:
            raise DataError(
                f"feature_layout has {len(self.feature_layout)} names for {inputs.shape[1]} columns"
            )
        index = self.target_index
        index = np.arange(targets.size) if index is None else np.asarray(index, dtype=int)
        object.__setattr__(self, "inputs", _frozen(inputs))
        object.__setattr__(self, "targets", _frozen(targets))
        object.__setattr__(self, "feature_layout", tuple(self.feature_layout))
        index = index.copy()
        index.setflags(write=False)
        object.__setattr__(self, "target_index", index)

    @property
    def n(self) -> int:
        return self.targets.size

    @property
    def d(self) -> int:
        return self.inputs.shape[1]

    def select(self, mask) -> "FeatureMatrix":
        mask = np.asarray(mask)
        return FeatureMatrix(
            self.inputs[mask], self.targets[mask], self.order,
            self.feature_layout, self.target_index[mask],
        )

    def between(self, start: int, stop: int) -> "FeatureMatrix":
        """Rows whose target position lies in ``[start, stop)``."""
        return self.select((self.target_index >= start) & (self.target_index < stop))


def lag_names(prefix: str, order: int) -> list[str]:
    return [f"{prefix}:t-{order - j}" for j in range(order)]


def build_lag_matrix(series: TimeSeries, order: int = DEFAULT_ORDER) -> FeatureMatrix:
    """Row ``i`` is ``x[i:i+order]`` and its target is ``x[i+order]``."""
    n = len(series)
    if order <= 0 or order >= n:
        raise SizingError(f"order must satisfy 0 < order < {n}, got {order}")
    x = series.values
    rows = np.lib.stride_tricks.sliding_window_view(x, order)[: n - order]
    return FeatureMatrix(
        rows.copy(), x[order:].copy(), order, lag_names("raw", order),
        np.arange(order, n),
    )


@dataclass(frozen=True)
class DescriptiveStats:
    max: float
    min: float
    median: float
    mean: float
    std: float
    skewness: float
    kurtosis: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("max", "min", "median", "mean", "std", "skewness", "kurtosis")}


def describe(series: TimeSeries) -> DescriptiveStats:
    """Sample statistics in the Table-style layout used for load data.

    ``std`` uses ``ddof=1``; skewness is the bias-corrected sample skewness and
    kurtosis the bias-corrected excess kurtosis. Both are 0 for a constant series.
    """
    x = series.values
    if x.size < 2:
        raise SizingError("describe needs at least two observations")
    std = float(np.std(x, ddof=1))
    if np.ptp(x) == 0.0:
        skew = kurt = 0.0
    else:
        skew = float(stats.skew(x, bias=False)) if x.size >= 3 else 0.0
        kurt = float(stats.kurtosis(x, fisher=True, bias=False)) if x.size >= 4 else 0.0
    return DescriptiveStats(
        max=float(x.max()), min=float(x.min()), median=float(np.median(x)),
        mean=float(x.mean()), std=std, skewness=skew, kurtosis=kurt,
    )


def regular_timestamps(start: datetime, n: int, period: timedelta = DEFAULT_SAMPLING_PERIOD):
    return tuple(start + i * period for i in range(n))


def as_series(values: Sequence[float] | TimeSeries) -> TimeSeries:
    return values if isinstance(values, TimeSeries) else TimeSeries(values)
