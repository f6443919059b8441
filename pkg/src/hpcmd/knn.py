"""K-nearest-neighbour classifier over scaled features."""
import math

import numpy as np

from . import kernels
from .core import ConfigError, DataError, DimensionError, TrainedModel

METRICS = {"euclidean": kernels.EUCLIDEAN, "manhattan": kernels.MANHATTAN}


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionError(f"distance needs equal-length vectors, got {a.shape} and {b.shape}")
    return a, b


def euclidean_distance(a, b):
    a, b = _pair(a, b)
    return math.sqrt(float(np.sum((a - b) ** 2)))


def manhattan_distance(a, b):
    a, b = _pair(a, b)
    return float(np.sum(np.abs(a - b)))


class KnnModel(TrainedModel):
    model_type = "knn"
    uses_scaling = True

    def __init__(self, X, y, k=5, metric="euclidean"):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DataError("KNN needs a non-empty 2-D training matrix")
        if y.shape != (X.shape[0],):
            raise DataError("KNN labels must match the training rows")
        if k < 1 or k % 2 == 0:
            raise ConfigError(f"k must be a positive odd integer, got {k}")
        if k > X.shape[0]:
            raise ConfigError(f"k={k} exceeds the {X.shape[0]} training samples")
        if metric not in METRICS:
            raise ConfigError(f"unknown metric {metric!r}")
        X.setflags(write=False)
        y.setflags(write=False)
        self.X, self.y, self.k, self.metric = X, y, int(k), metric
        self.n_features = X.shape[1]

    def neighbors(self, Q):
        """Indices of the k nearest training rows, nearest first."""
        Q = np.ascontiguousarray(self._as_matrix(Q))
        return kernels.knn_indices(self.X, Q, self.k, METRICS[self.metric])

    def _scores_labels(self, X):
        idx = kernels.knn_indices(self.X, np.ascontiguousarray(X), self.k, METRICS[self.metric])
        votes = self.y[idx].sum(axis=1)
        # k is odd, so a strict majority always exists
        return votes / self.k, (2 * votes > self.k).astype(np.int64)

    def to_params(self):
        return {"k": self.k, "metric": self.metric,
                "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_params(cls, p):
        return cls(np.asarray(p["X"], dtype=np.float64).reshape(len(p["y"]), -1), p["y"],
                   p["k"], p["metric"])


def train_knn(X, y, k=5, metric="euclidean"):
    """Lazy learner: store the scaled training set."""
    return KnnModel(X, y, k, metric)
