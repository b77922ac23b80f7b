"""Ensemble deep random vector functional link (edRVFL) regression.

Each enhancement layer has fixed random weights. Layer 1 sees the inputs ``X``;
deeper layers see ``[H^{l-1}, X]``. Every layer gets its own ridge-trained head
on ``D_l = [H^l, X]`` and the layer forecasts are combined by mean or median.

Random weights are drawn layer by layer from one generator seeded with
``rng_seed``: for each layer the ``in_dim x N`` weight block (uniform on
``[-weight_scale, weight_scale]``) is drawn first, then, when ``use_bias`` is
set, the ``1 x N`` bias row (uniform on ``[0, 1]``). Layer ``l`` therefore
gets the same weights whatever the total depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, ShapeError, StateError
from .ridge import ridge_solve
from .series import TimeSeries

ACTIVATIONS = {
    "sigmoid": lambda z: 0.5 * (1.0 + np.tanh(0.5 * z)),
    "tanh": np.tanh,
    "relu": lambda z: np.maximum(z, 0.0),
}
ENSEMBLE_RULES = ("mean", "median")


@dataclass(frozen=True)
class EdRvflConfig:
    num_layers: int = 5
    num_nodes: int = 100
    lambdas: tuple = None
    activation: str = "sigmoid"
    weight_scale: float = 1.0
    use_bias: bool = True
    ensemble_rule: str = "mean"
    rng_seed: int = 0

    def __post_init__(self):
        if self.num_layers < 1 or self.num_nodes < 1:
            raise ConfigError("num_layers and num_nodes must be positive")
        lambdas = (2.0**-8,) * self.num_layers if self.lambdas is None else tuple(
            float(v) for v in np.atleast_1d(self.lambdas)
        )
        if len(lambdas) == 1 and self.num_layers > 1:
            lambdas = lambdas * self.num_layers
        if len(lambdas) != self.num_layers:
            raise ConfigError(f"{len(lambdas)} lambdas given for {self.num_layers} layers")
        if any(not lam >= 0.0 for lam in lambdas):
            raise ConfigError(f"lambdas must be >= 0, got {lambdas}")
        object.__setattr__(self, "lambdas", lambdas)
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation must be one of {sorted(ACTIVATIONS)}, got {self.activation!r}")
        if self.ensemble_rule not in ENSEMBLE_RULES:
            raise ConfigError(f"ensemble_rule must be one of {ENSEMBLE_RULES}, got {self.ensemble_rule!r}")
        if not self.weight_scale > 0.0:
            raise ConfigError("weight_scale must be positive")

    def as_dict(self) -> dict:
        return {
            "num_layers": self.num_layers, "num_nodes": self.num_nodes,
            "lambdas": list(self.lambdas), "activation": self.activation,
            "weight_scale": self.weight_scale, "use_bias": self.use_bias,
            "ensemble_rule": self.ensemble_rule, "rng_seed": self.rng_seed,
        }


@dataclass(frozen=True)
class ForecastSet:
    per_layer: np.ndarray  # (L, n)
    combined: np.ndarray   # (n,)


@dataclass(frozen=True, eq=False)
class EdRvflModel:
    config: EdRvflConfig
    feature_dim: int
    enhancement_weights: tuple
    output_heads: Optional[tuple] = field(default=None)

    @property
    def fitted(self) -> bool:
        return self.output_heads is not None


def draw_layer_weights(rng: np.random.Generator, in_dim: int, cfg: EdRvflConfig) -> np.ndarray:
    W = rng.uniform(-cfg.weight_scale, cfg.weight_scale, size=(in_dim, cfg.num_nodes))
    if cfg.use_bias:
        W = np.vstack([W, rng.uniform(0.0, 1.0, size=(1, cfg.num_nodes))])
    return W


def init_model(cfg: EdRvflConfig, feature_dim: int) -> EdRvflModel:
    """Draw the fixed enhancement weights: ``W_1`` is d x N, deeper ``W_l`` are (d+N) x N
    (plus one bias row each when ``use_bias``)."""
    if feature_dim < 1:
        raise ConfigError("feature_dim must be >= 1")
    rng = np.random.default_rng(cfg.rng_seed)
    weights = []
    for layer in range(cfg.num_layers):
        in_dim = feature_dim if layer == 0 else feature_dim + cfg.num_nodes
        weights.append(draw_layer_weights(rng, in_dim, cfg))
    return EdRvflModel(cfg, feature_dim, tuple(weights))


def _with_ones(A: np.ndarray, use_bias: bool) -> np.ndarray:
    return np.hstack([A, np.ones((A.shape[0], 1))]) if use_bias else A


def _check_inputs(model: EdRvflModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise ShapeError(f"expected inputs with {model.feature_dim} columns, got shape {X.shape}")
    return X


def iter_hidden(model: EdRvflModel, X):
    """Yield ``H^1, H^2, ...`` lazily."""
    X = _check_inputs(model, X)
    g = ACTIVATIONS[model.config.activation]
    bias = model.config.use_bias
    H = None
    for W in model.enhancement_weights:
        layer_in = X if H is None else np.hstack([H, X])
        H = g(_with_ones(layer_in, bias) @ W)
        yield H


def forward_features(model: EdRvflModel, X) -> list:
    """Enhancement features ``H^1 .. H^L``, each n x N."""
    return list(iter_hidden(model, X))


def design_matrix(model: EdRvflModel, H: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Head design ``[H, X]``, with a trailing ones column when ``use_bias``."""
    return _with_ones(np.hstack([H, X]), model.config.use_bias)


def fit(model: EdRvflModel, X, y) -> EdRvflModel:
    """Solve each layer's head by ridge regression; the random weights are untouched."""
    X = _check_inputs(model, X)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != X.shape[0]:
        raise ShapeError(f"targets {y.shape} do not match {X.shape[0]} input rows")
    if y.size < 2:
        raise ShapeError("fit needs at least two samples")
    heads = []
    for H, lam in zip(iter_hidden(model, X), model.config.lambdas):
        heads.append(ridge_solve(design_matrix(model, H, X), y, lam))
    return replace(model, output_heads=tuple(heads))


def combine(per_layer: np.ndarray, rule: str) -> np.ndarray:
    if rule == "mean":
        # rounding can push a mean one ulp outside the layer range
        return np.clip(per_layer.mean(axis=0), per_layer.min(axis=0), per_layer.max(axis=0))
    if rule == "median":
        return np.median(per_layer, axis=0)
    raise ConfigError(f"unknown ensemble rule {rule!r}")


def predict(model: EdRvflModel, X, rule: Optional[str] = None) -> ForecastSet:
    """Layer forecasts ``[H^l, X] beta_l`` and their mean/median combination.

    ``rule`` overrides the configured ensemble rule, which lets one fitted model
    serve both the mean and the median variant.
    """
    if not model.fitted:
        raise StateError("model is not fitted")
    X = _check_inputs(model, X)
    per_layer = np.vstack([
        design_matrix(model, H, X) @ beta
        for H, beta in zip(iter_hidden(model, X), model.output_heads)
    ])
    return ForecastSet(per_layer, combine(per_layer, rule or model.config.ensemble_rule))


def persistence_forecast(series, horizon_start: int, horizon_stop: Optional[int] = None) -> np.ndarray:
    """Naive forecasts ``x[t-1]`` for ``t`` in ``[horizon_start, horizon_stop)``."""
    x = series.values if isinstance(series, TimeSeries) else np.asarray(series, dtype=float)
    stop = x.size if horizon_stop is None else horizon_stop
    if horizon_start < 1:
        raise ConfigError("horizon_start must be >= 1")
    if stop > x.size or stop < horizon_start:
        raise IndexError(f"horizon [{horizon_start}, {stop}) outside series of length {x.size}")
    return x[horizon_start - 1:stop - 1].copy()


def shallow_rvfl_fit_predict(
    X_train, y_train, X_test, num_nodes: int, lam: float, seed: int, **options
) -> np.ndarray:
    """Single-layer RVFL baseline (edRVFL with one layer)."""
    cfg = EdRvflConfig(num_layers=1, num_nodes=num_nodes, lambdas=(lam,), rng_seed=seed, **options)
    X_train = np.asarray(X_train, dtype=float)
    model = fit(init_model(cfg, X_train.shape[1]), X_train, y_train)
    return predict(model, X_test).combined


def fit_predict(cfg: EdRvflConfig, X_train, y_train, X_test) -> ForecastSet:
    X_train = np.asarray(X_train, dtype=float)
    model = fit(init_model(cfg, X_train.shape[1]), X_train, y_train)
    return predict(model, X_test)


def truncate(model: EdRvflModel, num_layers: int) -> EdRvflModel:
    """The first ``num_layers`` layers of ``model`` as a standalone model."""
    cfg = replace(model.config, num_layers=num_layers, lambdas=model.config.lambdas[:num_layers])
    heads = None if model.output_heads is None else model.output_heads[:num_layers]
    return EdRvflModel(cfg, model.feature_dim, model.enhancement_weights[:num_layers], heads)

