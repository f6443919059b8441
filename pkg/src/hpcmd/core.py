"""Shared classifier contract."""
from dataclasses import dataclass

import numpy as np

BENIGN = 0
MALWARE = 1

MODEL_TYPES = (
    "knn",
    "mlp",
    "decision_tree",
    "bagged_trees",
    "svm",
    "logistic_regression",
    "oner",
    "many_rules_oner",
)


class HpcmdError(Exception):
    """Base class for all errors raised by this package."""


class DataError(HpcmdError):
    """Bad input data: malformed files, empty sets, missing classes or families."""


class ConfigError(HpcmdError):
    """Invalid hyperparameters or experiment configuration."""


class DimensionError(HpcmdError, ValueError):
    """Feature vector length does not match what the model was trained on."""


@dataclass(frozen=True)
class Prediction:
    label: int
    score: float


class TrainedModel:
    """Base for fitted classifiers.

    Subclasses implement :meth:`_scores_labels` on a validated 2-D float array
    and return ``(scores, labels)``. Scores lie in [0, 1] and are oriented
    toward malware; a score above 0.5 always comes with label 1, below 0.5
    with label 0, and exactly 0.5 follows the model's own tie rule.
    """

    model_type = ""
    n_features = 0
    # whether the model expects min-max scaled features
    uses_scaling = False

    def _scores_labels(self, X):
        raise NotImplementedError

    def _as_matrix(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(
                f"{self.model_type} expects {self.n_features} features, got shape {X.shape}"
            )
        return X

    def predict_batch(self, X):
        """Return ``(labels, scores)`` arrays for the rows of ``X``."""
        X = self._as_matrix(X)
        scores, labels = self._scores_labels(X)
        return np.asarray(labels, dtype=np.int64), np.asarray(scores, dtype=np.float64)

    def predict(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise DimensionError(f"expected a single feature vector, got shape {x.shape}")
        labels, scores = self.predict_batch(x[None, :])
        return Prediction(int(labels[0]), float(scores[0]))

    def labels(self, X):
        return self.predict_batch(X)[0]

    def scores(self, X):
        return self.predict_batch(X)[1]

    def to_params(self):
        raise NotImplementedError

    @classmethod
    def from_params(cls, params):
        raise NotImplementedError


def check_binary_labels(y, what="training set"):
    y = np.asarray(y)
    if y.size == 0:
        raise DataError(f"{what} is empty")
    if not (np.any(y == 0) and np.any(y == 1)):
        raise DataError(f"{what} must contain both classes (degenerate training)")
    return y


def majority_label(n_benign, n_malware):
    """Majority class with ties going to benign."""
    return MALWARE if n_malware > n_benign else BENIGN
