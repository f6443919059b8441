"""C4.5-style binary decision trees and bootstrap-aggregated ensembles.

Trees split on ``x[feature] <= threshold`` (left) with thresholds at
midpoints between consecutive distinct values, chosen by gain ratio. There
is no pruning; ``max_depth`` and ``min_leaf`` are the only regularisers.
"""
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .core import BENIGN, MALWARE, ConfigError, DataError, TrainedModel


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 20  # None grows until purity
    min_leaf: int = 2

    def validate(self):
        if self.max_depth is not None and self.max_depth < 0:
            raise ConfigError("max_depth must be >= 0")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be >= 1")


def _entropy(counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c > 0)


def gain_ratio(X, y, feature_index, threshold):
    """Information gain of the split ``x[f] <= threshold`` over its split entropy (bits)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    left = X[:, feature_index] <= threshold
    nl = int(left.sum())
    nr = y.size - nl
    if nl == 0 or nr == 0:
        raise DataError("undefined split: one partition is empty")
    n = y.size
    pl, pr = int(y[left].sum()), int(y[~left].sum())
    parent = _entropy((n - pl - pr, pl + pr))
    children = (nl * _entropy((nl - pl, pl)) + nr * _entropy((nr - pr, pr))) / n
    return max(parent - children, 0.0) / _entropy((nl, nr))


class DecisionTreeModel(TrainedModel):
    """Flat-array tree; ``feature[i] == -1`` marks a leaf."""

    model_type = "decision_tree"

    def __init__(self, feature, threshold, left, right, counts, n_features, params=TreeParams()):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(-1, 2)
        m = self.feature.size
        if m == 0 or not all(a.shape[0] == m for a in (self.threshold, self.left, self.right, self.counts)):
            raise ConfigError("inconsistent tree arrays")
        if np.any(self.counts < 0) or np.any(self.counts.sum(axis=1) == 0):
            raise ConfigError("every node needs a positive class count")
        for a in (self.feature, self.threshold, self.left, self.right, self.counts):
            a.setflags(write=False)
        self.n_features = int(n_features)
        self.params = params
        self.leaf_label = np.where(self.counts[:, 1] > self.counts[:, 0], MALWARE, BENIGN)
        self.leaf_score = self.counts[:, 1] / self.counts.sum(axis=1)

    @property
    def n_nodes(self):
        return self.feature.size

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    @property
    def depth(self):
        """Longest root-to-leaf path in edges."""
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):  # children always follow parents
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def apply(self, X):
        """Leaf index reached by each row."""
        X = np.ascontiguousarray(self._as_matrix(X))
        return kernels.tree_leaves(self.feature, self.threshold, self.left, self.right, X)

    def _scores_labels(self, X):
        leaves = kernels.tree_leaves(self.feature, self.threshold, self.left, self.right,
                                     np.ascontiguousarray(X))
        return self.leaf_score[leaves], self.leaf_label[leaves]

    def to_params(self):
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "counts": self.counts.tolist(), "n_features": self.n_features,
                "hyper": asdict(self.params)}

    @classmethod
    def from_params(cls, p):
        return cls(p["feature"], p["threshold"], p["left"], p["right"], p["counts"],
                   p["n_features"], TreeParams(**p["hyper"]))

    def explain(self, feature_names=None):
        names = feature_names or [f"x{j}" for j in range(self.n_features)]
        lines = []

        def walk(i, indent, prefix):
            pad = "  " * indent
            if self.feature[i] < 0:
                b, m = self.counts[i]
                lines.append(f"{pad}{prefix}class {self.leaf_label[i]}  (benign={b}, malware={m})")
                return
            lines.append(f"{pad}{prefix}if {names[self.feature[i]]} <= {float(self.threshold[i])!r}")
            walk(self.left[i], indent + 1, "then ")
            walk(self.right[i], indent + 1, "else ")

        walk(0, 0, "")
        return "\n".join(lines) + "\n"


def train_tree(X, y, params=TreeParams()):
    """Greedy top-down induction; leaves take the majority class, ties benign."""
    params.validate()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.size:
        raise DataError("decision tree needs a non-empty training set")
    feature, threshold, left, right, counts = [], [], [], [], []

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        pos = int(y[idx].sum())
        counts.append((idx.size - pos, pos))
        return len(feature) - 1

    # explicit stack keeps parents ahead of children in the arrays
    root = new_node(np.arange(y.size))
    stack = [(root, np.arange(y.size), 0)]
    while stack:
        node, idx, depth = stack.pop()
        b, m = counts[node]
        if b == 0 or m == 0:
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            continue
        if idx.size < 2 * params.min_leaf:
            continue
        f, t, _ = kernels.best_split(np.ascontiguousarray(X[idx]), y[idx], params.min_leaf)
        if f < 0:
            continue
        go_left = X[idx, f] <= t
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = int(f), float(t)
        left[node] = new_node(li)
        right[node] = new_node(ri)
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))
    return DecisionTreeModel(feature, threshold, left, right, counts, X.shape[1], params)


class BaggedModel(TrainedModel):
    model_type = "bagged_trees"

    def __init__(self, trees, seed=0, bootstrap=True):
        trees = tuple(trees)
        if not trees:
            raise ConfigError("a bagged model needs at least one tree")
        self.trees = trees
        self.seed = int(seed)
        self.bootstrap = bool(bootstrap)
        self.n_features = trees[0].n_features

    @property
    def T(self):
        return len(self.trees)

    def votes(self, X):
        X = self._as_matrix(X)
        return np.sum([t.predict_batch(X)[0] for t in self.trees], axis=0)

    def _scores_labels(self, X):
        votes = np.sum([t.predict_batch(X)[0] for t in self.trees], axis=0)
        # plurality vote, ties benign
        return votes / self.T, (2 * votes > self.T).astype(np.int64)

    def to_params(self):
        return {"seed": self.seed, "bootstrap": self.bootstrap,
                "trees": [t.to_params() for t in self.trees]}

    @classmethod
    def from_params(cls, p):
        return cls([DecisionTreeModel.from_params(t) for t in p["trees"]], p["seed"], p["bootstrap"])


def train_bagged(X, y, T=25, params=TreeParams(), seed=0, bootstrap=True):
    """Fit ``T`` trees, each on an n-row resample drawn with replacement.

    Per-tree generators are spawned from ``seed`` so every tree's resample
    is fixed regardless of the order trees are built in.
    """
    if T < 1:
        raise ConfigError("T must be >= 1")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = y.size
    if n == 0:
        raise DataError("bagging needs a non-empty training set")
    trees = []
    for child in np.random.SeedSequence(int(seed)).spawn(T):
        if bootstrap:
            idx = np.random.default_rng(child).integers(0, n, size=n)
        else:
            idx = np.arange(n)
        trees.append(train_tree(X[idx], y[idx], params))
    return BaggedModel(trees, seed, bootstrap)

