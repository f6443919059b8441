"""Mutual-information feature scoring and top-k selection."""
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DataError

DEFAULT_BINS = 16


@dataclass(frozen=True)
class FeatureScore:
    feature_index: int
    score: float  # bits


@dataclass(frozen=True)
class SelectionResult:
    kept_indices: tuple
    all_scores: tuple


def mutual_information(x, y):
    """Plug-in estimate of I(X;Y) in bits over the empirical joint pmf."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise DataError("mutual_information needs two sequences of equal length")
    if x.size == 0:
        raise DataError("mutual_information of empty sequences is undefined")
    n = x.size
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    joint = np.zeros((xi.max() + 1, yi.max() + 1))
    np.add.at(joint, (xi, yi), 1.0)
    pxy = joint / n
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    nz = pxy > 0
    terms = pxy[nz] * np.log2(pxy[nz] / (px @ py)[nz])
    # rounding can leave a tiny negative sum for independent variables
    return max(float(terms.sum()), 0.0)


def discretize(values, bins):
    """Equal-frequency bin ids in [0, bins).

    The value at sorted rank r goes to bin floor(r * bins / n); equal values
    all take the bin of their first occurrence, so ties are never separated.
    """
    if int(bins) != bins or bins < 1:
        raise ConfigError(f"bins must be a positive integer, got {bins!r}")
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n == 0:
        raise DataError("cannot discretize an empty sequence")
    order = np.argsort(v, kind="stable")
    sv = v[order]
    ranks = np.arange(n)
    first = np.ones(n, dtype=bool)
    first[1:] = sv[1:] != sv[:-1]
    # rank of the first element in each run of equal values
    run_start = np.maximum.accumulate(np.where(first, ranks, 0))
    ids = np.empty(n, dtype=np.int64)
    ids[order] = run_start * int(bins) // n
    return ids


def score_features(X, y, bins=DEFAULT_BINS):
    X = np.asarray(X, dtype=np.float64)
    return tuple(FeatureScore(j, mutual_information(discretize(X[:, j], bins), y))
                 for j in range(X.shape[1]))


def rank_scores(scores, k):
    """Indices of the k best scores, higher first, lower index on ties."""
    order = sorted(range(len(scores)), key=lambda j: (-scores[j], j))
    return tuple(order[:k])


def select_k_best(ds, k=4, bins=DEFAULT_BINS):
    if k < 1:
        raise ConfigError("k must be positive")
    if k > ds.n_features:
        raise ConfigError(f"k={k} exceeds the dataset's {ds.n_features} features")
    if len(ds) == 0:
        raise DataError("cannot select features on an empty dataset")
    all_scores = score_features(ds.X, ds.y, bins)
    kept = rank_scores([s.score for s in all_scores], k)
    return SelectionResult(kept, all_scores)


def selection_report(result, feature_names):
    """``feature_name,score_bits`` lines sorted by descending score."""
    order = rank_scores([s.score for s in result.all_scores], len(result.all_scores))
    lines = ["feature_name,score_bits"]
    lines += [f"{feature_names[j]},{result.all_scores[j].score:.6f}" for j in order]
    return "\n".join(lines) + "\n"
