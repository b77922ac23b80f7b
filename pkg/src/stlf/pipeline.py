"""End-to-end training and forecasting for the supported model family.

Data flow for one series: chronological split, max-min scaling fitted on the
training segment, causal features (plain lags or walk-forward EWT), layer-wise
tuning on the validation segment, a validation fit on the training rows, and a
final refit on training + validation rows that produces the test forecasts and
the saved artifact. Metrics are reported in original units.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from .artifact import ModelArtifact
from .edrvfl import EdRvflConfig, fit, init_model, persistence_forecast, predict
from .errors import ConfigError, SizingError
from .evalstat import MetricReport, metric_report, rmse
from .series import (
    FeatureMatrix, NormalizationParams, SplitSpec, TimeSeries, build_lag_matrix,
    denormalize_array, normalize,
)
from .tuning import SearchSpace, TuningTrace, layerwise_tune
from .walkforward import (
    WalkForwardConfig, walk_forward_features, walk_forward_features_at,
)


@dataclass(frozen=True)
class ModelSpec:
    ewt: bool
    deep: bool
    rule: Optional[str]


MODELS = {
    "persistence": ModelSpec(False, False, None),
    "RVFL": ModelSpec(False, False, "mean"),
    "EWTRVFL": ModelSpec(True, False, "mean"),
    "Mea-edRVFL": ModelSpec(False, True, "mean"),
    "Med-edRVFL": ModelSpec(False, True, "median"),
    "EWTMea-edRVFL": ModelSpec(True, True, "mean"),
    "EWTMed-edRVFL": ModelSpec(True, True, "median"),
}


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of a training run (every field has a documented default)."""

    input: Optional[str] = None
    value_col: Optional[str] = None
    time_col: Optional[str] = None
    order: int = 48
    window_w: int = 336
    num_components: int = 2
    include_raw: bool = True
    drop_highest_band: bool = False
    freeze_boundaries: bool = False
    num_layers: int = 5
    node_grid: tuple = (50, 100, 150, 200)
    lambda_grid: tuple = (0.0, 2.0**-8, 2.0**-4)
    activations: tuple = ("sigmoid",)
    weight_scale: float = 1.0
    use_bias: bool = True
    train_fraction: float = 0.7
    valid_fraction: float = 0.1
    test_fraction: float = 0.2
    models: tuple = ("EWTMea-edRVFL",)
    seed: int = 0
    output: str = "stlf-out"
    figures: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        for name in ("node_grid", "lambda_grid", "activations", "models"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        unknown = [m for m in self.models if m not in MODELS]
        if unknown:
            raise ConfigError(f"unknown model(s) {unknown}; choose from {sorted(MODELS)}")
        if not self.models:
            raise ConfigError("no models selected")
        if self.order < 1 or self.num_layers < 1:
            raise ConfigError("order and num_layers must be positive")
        self.split_spec()
        self.walk_forward()
        self.search_space()

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.valid_fraction, self.test_fraction)

    def walk_forward(self) -> WalkForwardConfig:
        return WalkForwardConfig(
            window_w=self.window_w, order=self.order, num_components=self.num_components,
            include_raw=self.include_raw, drop_highest_band=self.drop_highest_band,
            freeze_boundaries_from_train=self.freeze_boundaries,
        )

    def search_space(self) -> SearchSpace:
        return SearchSpace(self.node_grid, self.lambda_grid, self.activations)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(f"unknown configuration keys: {extra}")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class PreparedData:
    series: TimeSeries
    params: NormalizationParams
    scaled: np.ndarray
    n_train: int
    n_valid: int
    n_test: int

    @property
    def valid_start(self) -> int:
        return self.n_train

    @property
    def test_start(self) -> int:
        return self.n_train + self.n_valid

    def segment(self, t) -> np.ndarray:
        t = np.asarray(t)
        return np.where(t < self.valid_start, "train", np.where(t < self.test_start, "valid", "test"))


def prepare(series: TimeSeries, run: RunConfig) -> PreparedData:
    n_train, n_valid, n_test = run.split_spec().lengths(len(series))
    params = NormalizationParams.fit(series.slice(0, n_train))
    return PreparedData(series, params, normalize(series, params).values,
                        n_train, n_valid, n_test)


def build_features(prep: PreparedData, run: RunConfig, ewt: bool,
                   cache: Optional[dict] = None) -> FeatureMatrix:
    if ewt:
        cfg = run.walk_forward()
        if cfg.window_w >= prep.n_train:
            raise SizingError(
                f"window_w ({cfg.window_w}) must be shorter than the training segment "
                f"({prep.n_train} points); lower --window or supply a longer series"
            )
        return walk_forward_features(prep.scaled, cfg, cache=cache, n_jobs=run.n_jobs)
    if run.order >= prep.n_train:
        raise SizingError(f"order ({run.order}) must be shorter than the training segment ({prep.n_train})")
    return build_lag_matrix(TimeSeries(prep.scaled), run.order)


@dataclass
class ModelResult:
    name: str
    artifact: ModelArtifact
    index: np.ndarray
    actual: np.ndarray
    forecast: np.ndarray
    per_layer: Optional[np.ndarray]
    fit_label: np.ndarray
    metrics: dict
    per_layer_test_rmse: list = field(default_factory=list)
    trace: Optional[TuningTrace] = None


def _metrics(prep: PreparedData, index, forecast) -> dict:
    train_raw = prep.series.values[:prep.n_train]
    seg = prep.segment(index)
    actual = prep.series.values[index]
    out = {}
    for name in ("train", "valid", "test"):
        sel = seg == name
        if sel.any():
            out[name] = metric_report(forecast[sel], actual[sel], train_raw)
    return out


def _persistence(prep: PreparedData, run: RunConfig) -> ModelResult:
    index = np.arange(1, len(prep.series))
    forecast = persistence_forecast(prep.series, 1)
    artifact = ModelArtifact("persistence", prep.params, run.order, ("raw:t-1",))
    return ModelResult(
        "persistence", artifact, index, prep.series.values[index], forecast, None,
        np.full(index.size, "none"), _metrics(prep, index, forecast),
    )


def train_model(prep: PreparedData, run: RunConfig, name: str,
                cache: Optional[dict] = None) -> ModelResult:
    spec = MODELS[name]
    if spec.rule is None:
        return _persistence(prep, run)

    feats = build_features(prep, run, spec.ewt, cache)
    train = feats.between(0, prep.valid_start)
    valid = feats.between(prep.valid_start, prep.test_start)
    fitting = feats.between(0, prep.test_start)
    test = feats.between(prep.test_start, len(prep.series))
    if train.n < 2:
        raise SizingError(f"{name}: only {train.n} training rows after feature construction")

    layers = run.num_layers if spec.deep else 1
    base = EdRvflConfig(num_layers=1, weight_scale=run.weight_scale, use_bias=run.use_bias,
                        ensemble_rule=spec.rule, rng_seed=run.seed)
    if valid.n:
        cfg, trace = layerwise_tune(train, valid, run.search_space(), layers, run.seed, base)
    else:
        # no validation segment: take the first grid point for every layer
        cfg = replace(base, num_layers=layers, num_nodes=int(run.node_grid[0]),
                      lambdas=(float(run.lambda_grid[0]),) * layers, activation=run.activations[0])
        trace = None

    empty = init_model(cfg, feats.d)
    val_model = fit(empty, train.inputs, train.targets)
    final = fit(empty, fitting.inputs, fitting.targets) if valid.n else val_model

    early = feats.between(0, prep.test_start)
    early_fc = predict(val_model, early.inputs)
    test_fc = predict(final, test.inputs)
    index = np.concatenate([early.target_index, test.target_index])
    per_layer = denormalize_array(np.hstack([early_fc.per_layer, test_fc.per_layer]), prep.params)
    forecast = denormalize_array(np.concatenate([early_fc.combined, test_fc.combined]), prep.params)
    fit_label = np.array(["train"] * early.n + ["train+valid" if valid.n else "train"] * test.n)

    actual = prep.series.values[index]
    test_sel = prep.segment(index) == "test"
    layer_rmse = [rmse(row[test_sel], actual[test_sel]) for row in per_layer]

    artifact = ModelArtifact(
        name, prep.params, run.order, feats.feature_layout, final,
        run.walk_forward() if spec.ewt else None,
    )
    return ModelResult(name, artifact, index, actual, forecast, per_layer, fit_label,
                       _metrics(prep, index, forecast), layer_rmse, trace)


def run_training(series: TimeSeries, run: RunConfig) -> tuple[PreparedData, list]:
    prep = prepare(series, run)
    cache: dict = {}
    return prep, [train_model(prep, run, name, cache) for name in run.models]


def forecast_rolling(artifact: ModelArtifact, series: TimeSeries, start: int, horizon: int) -> np.ndarray:
    """One-step-ahead forecasts for origins ``start .. start+horizon-1`` in original units.

    Origin ``t`` may equal ``len(series)`` (the first unseen step); each forecast
    uses observations before its origin only.
    """
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    stop = start + horizon
    if start < artifact.min_history or stop - 1 > len(series):
        raise SizingError(
            f"origins [{start}, {stop}) need {artifact.min_history} points of history and "
            f"must not exceed {len(series)}"
        )
    x = series.values
    if artifact.model is None:
        return x[start - 1:stop - 1].copy()
    z = (x - artifact.normalization.x_min) / artifact.normalization.span
    if artifact.walk_forward is not None:
        cfg = artifact.walk_forward
        if cfg.feature_layout() != artifact.feature_layout:
            raise ConfigError("artifact feature layout does not match its walk-forward settings")
        rows = np.vstack([walk_forward_features_at(z, t, cfg) for t in range(start, stop)])
    else:
        rows = np.vstack([z[t - artifact.order:t] for t in range(start, stop)])
    if rows.shape[1] != artifact.model.feature_dim:
        raise ConfigError(
            f"feature layout mismatch: {rows.shape[1]} features, model expects {artifact.model.feature_dim}"
        )
    return denormalize_array(predict(artifact.model, rows).combined, artifact.normalization)


def series_digest(series: TimeSeries) -> str:
    return hashlib.sha256(np.ascontiguousarray(series.values).tobytes()).hexdigest()


def metric_dict(metrics: dict) -> dict:
    return {k: v.as_dict() for k, v in metrics.items() if isinstance(v, MetricReport)}
