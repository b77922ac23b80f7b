"""Self-describing JSON model artifacts.

Arrays are stored as base64 little-endian float64 with their shape, so a
save/load round trip reproduces every weight bit for bit and identical models
produce identical files.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .edrvfl import EdRvflConfig, EdRvflModel
from .errors import ArtifactError
from .series import NormalizationParams
from .walkforward import WalkForwardConfig

SCHEMA = "stlf.model/1"


def encode_array(a) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "dtype": "<f8",
            "data": base64.b64encode(a.tobytes()).decode("ascii")}


def decode_array(obj) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype=obj.get("dtype", "<f8")).reshape(obj["shape"]).astype(float)


@dataclass(frozen=True)
class ModelArtifact:
    """Everything needed to forecast: model, scaling and feature recipe.

    ``model`` is None for the persistence baseline. ``walk_forward`` is None when
    the inputs are plain lags of length ``order``.
    """

    name: str
    normalization: NormalizationParams
    order: int
    feature_layout: tuple
    model: Optional[EdRvflModel] = None
    walk_forward: Optional[WalkForwardConfig] = None

    @property
    def min_history(self) -> int:
        if self.model is None:
            return 1
        return self.walk_forward.window_w if self.walk_forward else self.order

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "name": self.name,
            "kind": "persistence" if self.model is None else "edrvfl",
            "normalization": {"x_min": self.normalization.x_min, "x_max": self.normalization.x_max},
            "features": {
                "order": self.order,
                "walk_forward": None if self.walk_forward is None else self.walk_forward.as_dict(),
                "feature_layout": list(self.feature_layout),
            },
        }
        if self.model is not None:
            out["config"] = self.model.config.as_dict()
            out["feature_dim"] = self.model.feature_dim
            out["enhancement_weights"] = [encode_array(W) for W in self.model.enhancement_weights]
            out["output_heads"] = [encode_array(b) for b in self.model.output_heads]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ModelArtifact":
        if obj.get("schema") != SCHEMA:
            raise ArtifactError(f"unsupported artifact schema {obj.get('schema')!r}, expected {SCHEMA}")
        try:
            feats = obj["features"]
            wf = feats["walk_forward"]
            model = None
            if obj["kind"] == "edrvfl":
                cfg = EdRvflConfig(**{**obj["config"], "lambdas": tuple(obj["config"]["lambdas"])})
                model = EdRvflModel(
                    cfg, int(obj["feature_dim"]),
                    tuple(decode_array(w) for w in obj["enhancement_weights"]),
                    tuple(decode_array(b) for b in obj["output_heads"]),
                )
            return cls(
                name=obj["name"],
                normalization=NormalizationParams(**obj["normalization"]),
                order=int(feats["order"]),
                feature_layout=tuple(feats["feature_layout"]),
                model=model,
                walk_forward=None if wf is None else WalkForwardConfig(**wf),
            )
        except (KeyError, TypeError) as exc:
            raise ArtifactError(f"malformed model artifact: {exc}") from None

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "ModelArtifact":
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ArtifactError(f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{path} is not valid JSON: {exc}") from None
        return cls.from_dict(obj)
