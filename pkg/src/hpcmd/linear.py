"""Linear SVM and logistic regression sharing the scorer ``w.x + b``."""
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import ConfigError, DataError, TrainedModel, check_binary_labels


def sigmoid(z):
    """Logistic function, stable for large |z|; works on scalars and arrays."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return float(out) if out.ndim == 0 else out


def hyperplane_width(w):
    """1/|w|, the width formula used throughout this package (not 2/|w|)."""
    norm = float(np.linalg.norm(np.asarray(w, dtype=np.float64)))
    return math.inf if norm == 0.0 else 1.0 / norm


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    learning_rate: float = 0.01
    epochs: int = 200
    seed: int = 0


@dataclass(frozen=True)
class LogisticParams:
    learning_rate: float = 0.1
    epochs: int = 200
    seed: int = 0


class LinearModel(TrainedModel):
    uses_scaling = True

    def __init__(self, w, b, kind, params=None, history=()):
        if kind not in ("svm", "logistic"):
            raise ConfigError(f"unknown linear model kind {kind!r}")
        w = np.array(w, dtype=np.float64)
        if w.ndim != 1 or not np.all(np.isfinite(w)) or not math.isfinite(b):
            raise ConfigError("linear model weights must be a finite vector")
        w.setflags(write=False)
        self.w, self.b, self.kind = w, float(b), kind
        self.params = params
        self.history = tuple(float(h) for h in history)
        self.n_features = w.size
        self.model_type = "svm" if kind == "svm" else "logistic_regression"

    @property
    def margin_width(self):
        return hyperplane_width(self.w)

    def decision(self, X):
        return self._as_matrix(X) @ self.w + self.b

    def _scores_labels(self, X):
        z = X @ self.w + self.b
        # both kinds: label 1 iff z >= 0, i.e. sigmoid(z) >= 0.5
        return sigmoid(z), (z >= 0).astype(np.int64)

    def to_params(self):
        return {"w": self.w.tolist(), "b": self.b, "kind": self.kind,
                "hyper": asdict(self.params) if self.params else None,
                "history": list(self.history)}

    @classmethod
    def from_params(cls, p):
        hyper = p.get("hyper")
        if hyper is not None:
            hyper = (SvmParams if p["kind"] == "svm" else LogisticParams)(**hyper)
        return cls(p["w"], p["b"], p["kind"], hyper, p.get("history", ()))


def _prepare(X, y, what):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = check_binary_labels(y, f"{what} training set")
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DataError(f"{what} training data shape mismatch")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{what} training data must be finite")
    return X, y


def hinge_loss(w, b, X, y_pm):
    """Mean hinge loss with labels in {-1, +1}."""
    return float(np.mean(np.maximum(0.0, 1.0 - y_pm * (X @ w + b))))


def svm_objective(w, b, X, y_pm, C):
    return 0.5 * float(w @ w) + C * float(np.sum(np.maximum(0.0, 1.0 - y_pm * (X @ w + b))))


def svm_train(X, y, params=SvmParams()):
    """Subgradient descent on 0.5*|w|^2 + C * sum(hinge), one sample at a time.

    The step for epoch e (1-based) is ``learning_rate / e``. Because
    subgradient steps are not descent steps, the best iterate by objective
    seen at an epoch checkpoint is returned; ``history`` holds that best
    objective after each epoch.
    """
    if params.C <= 0:
        raise ConfigError("C must be positive")
    if params.learning_rate <= 0 or params.epochs < 0:
        raise ConfigError("learning_rate must be positive and epochs >= 0")
    X, y = _prepare(X, y, "SVM")
    y_pm = np.where(y == 1, 1.0, -1.0)
    rng = np.random.default_rng(params.seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    best = (svm_objective(w, b, X, y_pm, params.C), w.copy(), b)
    history = []
    for epoch in range(1, params.epochs + 1):
        order = rng.permutation(X.shape[0])
        b = kernels.hinge_epoch(w, b, X, y_pm, order, params.learning_rate / epoch, params.C)
        obj = svm_objective(w, b, X, y_pm, params.C)
        if obj <= best[0]:
            best = (obj, w.copy(), b)
        history.append(best[0])
    return LinearModel(best[1], best[2], "svm", params, history)


def logreg_train(X, y, params=LogisticParams()):
    """Per-sample gradient descent on binary cross-entropy from zero weights."""
    if params.learning_rate <= 0 or params.epochs < 0:
        raise ConfigError("learning_rate must be positive and epochs >= 0")
    X, y = _prepare(X, y, "logistic regression")
    target = y.astype(np.float64)
    rng = np.random.default_rng(params.seed)
    w = np.zeros(X.shape[1])
    b = 0.0
    history = []
    for _ in range(params.epochs):
        order = rng.permutation(X.shape[0])
        b = kernels.logistic_epoch(w, b, X, target, order, params.learning_rate)
        history.append(cross_entropy(w, b, X, target))
    return LinearModel(w, b, "logistic", params, history)


def cross_entropy(w, b, X, y):
    z = X @ w + b
    # log(1 + e^z) - y*z, written to avoid overflow
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def svm_predict(model, x):
    return model.predict(x)


def logreg_predict(model, x):
    return model.predict(x)
