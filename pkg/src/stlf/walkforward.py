"""Causal (walk-forward) EWT features.

At every forecast origin ``t`` only ``x[t-w:t]`` is decomposed, and the last
``order`` samples of each sub-series become inputs for predicting ``x[t]``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, SizingError
from .ewt import EwtBoundaries, build_filter_bank, decompose, detect_boundaries
from .series import DEFAULT_ORDER, FeatureMatrix, TimeSeries, lag_names

DEFAULT_WINDOW = 336  # one week of half-hourly data


@dataclass(frozen=True)
class WalkForwardConfig:
    window_w: int = DEFAULT_WINDOW
    order: int = DEFAULT_ORDER
    num_components: int = 2
    include_raw: bool = True
    drop_highest_band: bool = False
    freeze_boundaries_from_train: bool = False
    gamma: float | str = "auto"

    def __post_init__(self):
        if self.order < 1 or self.window_w < 1 or self.num_components < 1:
            raise ConfigError("window_w, order and num_components must be positive")
        if self.window_w < self.order:
            raise ConfigError(f"window_w ({self.window_w}) must be >= order ({self.order})")
        if self.window_w < 2 * self.num_components:
            raise ConfigError(
                f"window_w ({self.window_w}) must be >= 2 * num_components ({self.num_components})"
            )
        if self.drop_highest_band and self.num_components < 2 and not self.include_raw:
            raise ConfigError("dropping the only band leaves no features")

    @property
    def kept_components(self) -> int:
        return self.num_components - int(self.drop_highest_band)

    @property
    def feature_dim(self) -> int:
        return self.order * (self.kept_components + int(self.include_raw))

    def feature_layout(self) -> tuple:
        names = []
        if self.include_raw:
            names += lag_names("raw", self.order)
        for k in range(self.kept_components):
            names += lag_names(f"ewt{k}", self.order)
        return tuple(names)

    def as_dict(self) -> dict:
        return {
            "window_w": self.window_w, "order": self.order,
            "num_components": self.num_components, "include_raw": self.include_raw,
            "drop_highest_band": self.drop_highest_band,
            "freeze_boundaries_from_train": self.freeze_boundaries_from_train,
            "gamma": self.gamma,
        }


def _values(series) -> np.ndarray:
    return series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)


def _row(x: np.ndarray, t: int, cfg: WalkForwardConfig,
         frozen: Optional[EwtBoundaries]) -> np.ndarray:
    window = x[t - cfg.window_w:t]
    bounds = frozen if frozen is not None else detect_boundaries(window, cfg.num_components)
    comps = decompose(window, build_filter_bank(bounds, cfg.gamma)).sub_series
    parts = [window[-cfg.order:]] if cfg.include_raw else []
    parts += [c[-cfg.order:] for c in comps[:cfg.kept_components]]
    return np.concatenate(parts)


def _frozen_boundaries(x: np.ndarray, cfg: WalkForwardConfig) -> Optional[EwtBoundaries]:
    if not cfg.freeze_boundaries_from_train:
        return None
    # the first window is always inside the training segment
    return detect_boundaries(x[:cfg.window_w], cfg.num_components)


def walk_forward_features_at(series, t: int, cfg: WalkForwardConfig) -> np.ndarray:
    """Feature row for forecast origin ``t``; uses ``x[t-window_w:t]`` only."""
    x = _values(series)
    if not cfg.window_w <= t < x.size + 1:
        raise IndexError(f"origin {t} outside [{cfg.window_w}, {x.size}]")
    return _row(x, t, cfg, _frozen_boundaries(x, cfg))


def walk_forward_features(
    series,
    cfg: WalkForwardConfig = WalkForwardConfig(),
    cache: Optional[dict] = None,
    n_jobs: int = 1,
) -> FeatureMatrix:
    """Rows for every origin ``t`` in ``[window_w, len(series))``, target ``x[t]``.

    ``cache`` maps origin -> feature row and is filled as rows are computed, so
    repeated calls over the same series skip the decompositions. The cache must
    only be reused for the same series prefix and config. Rows are ordered by
    ``t`` regardless of ``n_jobs``.
    """
    x = _values(series)
    if x.size <= cfg.window_w:
        raise SizingError(f"series length {x.size} must exceed window_w {cfg.window_w}")
    cache = {} if cache is None else cache
    frozen = _frozen_boundaries(x, cfg)
    origins = range(cfg.window_w, x.size)
    todo = [t for t in origins if t not in cache]

    def work(t):
        return t, _row(x, t, cfg, frozen)

    if n_jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, todo))
    else:
        results = [work(t) for t in todo]
    cache.update(results)

    inputs = np.vstack([cache[t] for t in origins])
    return FeatureMatrix(
        inputs, x[cfg.window_w:].copy(), cfg.order, cfg.feature_layout(),
        np.arange(cfg.window_w, x.size),
    )
