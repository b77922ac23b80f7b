"""Layer-wise hyperparameter search for edRVFL on a validation split.

Stage 1 searches activation x node count x lambda for a one-layer network.
Node count and activation are then frozen, and each deeper layer ``l`` only
chooses its own lambda, scoring the validation RMSE of layer ``l``'s head while
every shallower layer keeps its weights and lambda.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .edrvfl import EdRvflConfig, design_matrix, fit_predict, init_model, iter_hidden
from .errors import ConfigError, NumericalError, ShapeError
from .evalstat import rmse
from .ridge import ridge_solve
from .series import FeatureMatrix

NODE_GRID = (50, 100, 150, 200)
LAMBDA_GRID = (0.0, 2.0**-8, 2.0**-4)


@dataclass(frozen=True)
class SearchSpace:
    node_grid: tuple = NODE_GRID
    lambda_grid: tuple = LAMBDA_GRID
    activations: tuple = ("sigmoid",)
    seeds: tuple = ()

    def __post_init__(self):
        for name in ("node_grid", "lambda_grid", "activations"):
            value = tuple(getattr(self, name))
            if not value:
                raise ConfigError(f"search space {name} is empty")
            object.__setattr__(self, name, value)
        object.__setattr__(self, "seeds", tuple(self.seeds))
        if any(not lam >= 0.0 for lam in self.lambda_grid):
            raise ConfigError(f"lambda grid must be non-negative: {self.lambda_grid}")
        if any(int(n) < 1 for n in self.node_grid):
            raise ConfigError(f"node grid must be positive: {self.node_grid}")

    def as_dict(self) -> dict:
        return {"node_grid": list(self.node_grid), "lambda_grid": list(self.lambda_grid),
                "activations": list(self.activations), "seeds": list(self.seeds)}


@dataclass
class TuningTrace:
    lambdas: list = field(default_factory=list)
    num_nodes: Optional[int] = None
    activation: Optional[str] = None
    candidates: list = field(default_factory=list)
    seconds: float = 0.0

    def stage(self, layer: int) -> list:
        return [c for c in self.candidates if c["layer"] == layer]

    def as_dict(self, timing: bool = True) -> dict:
        out = {"lambdas": self.lambdas, "num_nodes": self.num_nodes,
               "activation": self.activation, "candidates": self.candidates}
        if timing:
            out["seconds"] = self.seconds
        return out

    def to_json(self, path, timing: bool = True) -> None:
        with open(path, "w") as fh:
            json.dump(self.as_dict(timing), fh, indent=2, allow_nan=True)

    def to_csv(self, path) -> None:
        cols = ["layer", "activation", "num_nodes", "lam", "rmse", "chosen", "prefix_digest"]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, cols, lineterminator="\n", extrasaction="ignore")
            writer.writeheader()
            writer.writerows(self.candidates)


def _selection_key(cand: dict):
    # lowest RMSE, then larger lambda, then fewer nodes
    return (cand["rmse"], -cand["lam"], cand["num_nodes"])


def _check(train: FeatureMatrix, valid: FeatureMatrix) -> None:
    if valid.n == 0:
        raise ConfigError("tuning needs a non-empty validation set")
    if train.feature_layout != valid.feature_layout:
        raise ShapeError("train and validation feature layouts differ")


def grid_eval(cfg: EdRvflConfig, train: FeatureMatrix, valid: FeatureMatrix) -> float:
    """Fit ``cfg`` on ``train`` and return the validation RMSE of the combined forecast."""
    _check(train, valid)
    pred = fit_predict(cfg, train.inputs, train.targets, valid.inputs).combined
    return rmse(pred, valid.targets)


def _safe(score_fn) -> float:
    try:
        return float(score_fn())
    except NumericalError:
        return float("inf")


def _digest(weights, lambdas) -> str:
    h = hashlib.sha256()
    for W in weights:
        h.update(np.ascontiguousarray(W).tobytes())
    h.update(np.asarray(lambdas, dtype=float).tobytes())
    return h.hexdigest()[:16]


def layerwise_tune(
    train: FeatureMatrix,
    valid: FeatureMatrix,
    space: SearchSpace = SearchSpace(),
    num_layers: int = 5,
    seed: int = 0,
    base: Optional[EdRvflConfig] = None,
) -> tuple[EdRvflConfig, TuningTrace]:
    """Choose node count, activation and one lambda per layer.

    Candidate scores are averaged over ``space.seeds`` when given, otherwise
    ``seed`` alone is used. Candidates whose ridge system is singular score
    ``inf``. Evaluations made: ``|activations| * |node_grid| * |lambda_grid|``
    for layer 1 plus ``|lambda_grid|`` for each deeper layer.
    """
    _check(train, valid)
    if num_layers < 1:
        raise ConfigError("num_layers must be >= 1")
    base = base or EdRvflConfig(num_layers=1)
    seeds = space.seeds or (seed,)
    trace = TuningTrace()
    started = time.perf_counter()

    stage1 = []
    for act in space.activations:
        for nodes in space.node_grid:
            for lam in space.lambda_grid:
                scores = [
                    _safe(lambda s=s: grid_eval(
                        replace(base, num_layers=1, num_nodes=int(nodes), lambdas=(lam,),
                                activation=act, rng_seed=s),
                        train, valid))
                    for s in seeds
                ]
                stage1.append({"layer": 1, "activation": act, "num_nodes": int(nodes),
                               "lam": float(lam), "rmse": float(np.mean(scores)),
                               "chosen": False, "prefix_digest": ""})
    best = min(stage1, key=_selection_key)
    best["chosen"] = True
    trace.candidates.extend(stage1)
    trace.activation, trace.num_nodes = best["activation"], best["num_nodes"]
    lambdas = [best["lam"]]

    if num_layers > 1:
        # hidden features do not depend on lambda, so each stage computes them once
        models = [
            init_model(replace(base, num_layers=num_layers, num_nodes=trace.num_nodes,
                               lambdas=(0.0,) * num_layers, activation=trace.activation,
                               rng_seed=s), train.d)
            for s in seeds
        ]
        hidden = [(list(iter_hidden(m, train.inputs)), list(iter_hidden(m, valid.inputs)))
                  for m in models]
        for layer in range(2, num_layers + 1):
            digest = _digest(models[0].enhancement_weights[:layer - 1], lambdas)
            stage = []
            for lam in space.lambda_grid:
                scores = []
                for m, (h_tr, h_va) in zip(models, hidden):
                    D_tr = design_matrix(m, h_tr[layer - 1], train.inputs)
                    D_va = design_matrix(m, h_va[layer - 1], valid.inputs)
                    scores.append(_safe(lambda: rmse(
                        D_va @ ridge_solve(D_tr, train.targets, lam), valid.targets)))
                stage.append({"layer": layer, "activation": trace.activation,
                              "num_nodes": trace.num_nodes, "lam": float(lam),
                              "rmse": float(np.mean(scores)), "chosen": False,
                              "prefix_digest": digest})
            choice = min(stage, key=_selection_key)
            choice["chosen"] = True
            trace.candidates.extend(stage)
            lambdas.append(choice["lam"])

    if not np.isfinite(best["rmse"]):
        raise NumericalError("every layer-1 candidate failed; add a positive lambda to the grid")
    trace.lambdas = lambdas
    trace.seconds = time.perf_counter() - started
    cfg = replace(base, num_layers=num_layers, num_nodes=trace.num_nodes,
                  lambdas=tuple(lambdas), activation=trace.activation, rng_seed=seed)
    return cfg, trace


def count_evaluations(space: SearchSpace, num_layers: int) -> int:
    return (len(space.activations) * len(space.node_grid) * len(space.lambda_grid)
            + (num_layers - 1) * len(space.lambda_grid))


def summarize(trace: TuningTrace) -> str:
    rows = [f"chosen: activation={trace.activation} nodes={trace.num_nodes} "
            f"lambdas={[float(v) for v in trace.lambdas]}"]
    for layer in sorted({c['layer'] for c in trace.candidates}):
        best = [c for c in trace.stage(layer) if c["chosen"]][0]
        rows.append(f"  layer {layer}: lambda={best['lam']:g} valid RMSE={best['rmse']:.6g}")
    return "\n".join(rows)
