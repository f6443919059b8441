"""Versioned JSON model files.

A model file bundles the fitted model with the feature names it reads and,
for scale-sensitive models, the min-max parameters fitted on its training
set. Floats are written with ``repr`` precision so a reload predicts
bit-identically.
"""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import ConfigError, DataError
from .dataset import ScalingParams
from .knn import KnnModel
from .linear import LinearModel
from .mlp import MlpModel
from .rules import RuleListModel
from .trees import BaggedModel, DecisionTreeModel

FORMAT_VERSION = 1

MODEL_CLASSES = {
    "knn": KnnModel,
    "mlp": MlpModel,
    "decision_tree": DecisionTreeModel,
    "bagged_trees": BaggedModel,
    "svm": LinearModel,
    "logistic_regression": LinearModel,
    "oner": RuleListModel,
    "many_rules_oner": RuleListModel,
}


@dataclass(frozen=True)
class ModelBundle:
    model: object
    feature_names: tuple
    scaling: ScalingParams = None

    @property
    def model_type(self):
        return self.model.model_type

    def features_from(self, ds):
        """Pick this model's columns out of ``ds`` by name and scale them if needed."""
        try:
            idx = [ds.feature_names.index(name) for name in self.feature_names]
        except ValueError:
            missing = [n for n in self.feature_names if n not in ds.feature_names]
            raise DataError(f"dataset lacks model features: {', '.join(missing)}") from None
        X = ds.X[:, idx]
        return self.scaling.transform(X) if self.scaling is not None else X

    def predict_dataset(self, ds):
        return self.model.predict_batch(self.features_from(ds))

    def to_dict(self):
        return {
            "format_version": FORMAT_VERSION,
            "model_type": self.model.model_type,
            "feature_names": list(self.feature_names),
            "scaling": self.scaling.to_dict() if self.scaling is not None else None,
            "params": self.model.to_params(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format_version") != FORMAT_VERSION:
            raise ConfigError(f"unsupported model file version {d.get('format_version')!r}")
        mtype = d.get("model_type")
        if mtype not in MODEL_CLASSES:
            raise ConfigError(f"unknown model type {mtype!r}")
        model = MODEL_CLASSES[mtype].from_params(d["params"])
        scaling = ScalingParams.from_dict(d["scaling"]) if d.get("scaling") else None
        return cls(model, tuple(d["feature_names"]), scaling)


def dumps(bundle):
    return json.dumps(bundle.to_dict(), indent=1, allow_nan=False) + "\n"


def save_model(bundle, path):
    Path(path).write_text(dumps(bundle), encoding="utf-8")


def load_model(path):
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed model file: {exc}") from exc
    return ModelBundle.from_dict(d)


def probe_equal(a, b, X):
    """True when two models give identical labels and scores on ``X``."""
    la, sa = a.predict_batch(X)
    lb, sb = b.predict_batch(X)
    return np.array_equal(la, lb) and np.array_equal(sa, sb)
