import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcmd.core import ConfigError, DataError, DimensionError
from hpcmd.trees import BaggedModel, TreeParams, gain_ratio, train_bagged, train_tree


def H(*counts):
    n = sum(counts)
    return -sum(c / n * math.log2(c / n) for c in counts if c)


def trace(tree, x):
    """Independent root-to-leaf descent over the node arrays."""
    i = 0
    while tree.feature[i] >= 0:
        i = tree.left[i] if x[tree.feature[i]] <= tree.threshold[i] else tree.right[i]
    return i


def consistent_data(rng, n=120, d=3):
    X = np.round(rng.random((n, d)) * 50)
    X = np.unique(X, axis=0)
    y = rng.integers(0, 2, X.shape[0])
    return X, y


def test_gain_ratio_perfect_split():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    assert gain_ratio(X, [0, 0, 1, 1], 0, 2.5) == pytest.approx(1.0)


def test_gain_ratio_independent_split():
    X = np.array([[1.0], [2.0], [3.0], [4.0]])
    assert gain_ratio(X, [0, 1, 0, 1], 0, 2.5) == 0.0


def test_gain_ratio_hand_entropy():
    X = np.arange(8, dtype=float)[:, None]
    y = [0, 0, 0, 1, 1, 1, 1, 1]  # left 3/1, right 0/4
    gain = H(3, 5) - (4 / 8) * H(3, 1) - (4 / 8) * H(0, 4)
    assert gain_ratio(X, y, 0, 3.5) == pytest.approx(gain / H(4, 4), abs=1e-12)


def test_gain_ratio_swap_invariance():
    X = np.arange(8, dtype=float)[:, None]
    y = np.array([0, 1, 0, 0, 1, 1, 0, 1])
    a = gain_ratio(X, y, 0, 2.5)
    b = gain_ratio(-X, y, 0, -3.0)  # same partition with sides swapped
    assert a == pytest.approx(b, abs=1e-15)


def test_gain_ratio_empty_partition():
    with pytest.raises(DataError):
        gain_ratio(np.array([[1.0], [2.0]]), [0, 1], 0, 5.0)


def test_single_class_is_one_leaf():
    t = train_tree(np.random.default_rng(0).random((10, 2)), np.ones(10, dtype=int))
    assert t.n_nodes == 1 and t.depth == 0
    assert t.predict([0.5, 0.5]).label == 1


def test_one_dimensional_split():
    X = np.array([[1.0], [2.0], [8.0], [9.0]])
    t = train_tree(X, [0, 0, 1, 1], TreeParams(min_leaf=1))
    assert t.n_nodes == 3
    assert 2.0 < t.threshold[0] < 8.0
    assert set(t.leaf_score[t.feature < 0]) == {0.0, 1.0}


def test_empty_dataset():
    with pytest.raises(DataError):
        train_tree(np.zeros((0, 2)), np.zeros(0, dtype=int))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fully_grown_tree_memorizes(seed):
    X, y = consistent_data(np.random.default_rng(seed))
    t = train_tree(X, y, TreeParams(max_depth=None, min_leaf=1))
    assert np.array_equal(t.labels(X), y)


def test_max_depth_and_min_leaf_respected(rng):
    X, y = consistent_data(rng, 300)
    t = train_tree(X, y, TreeParams(max_depth=3, min_leaf=5))
    assert t.depth <= 3
    leaves = t.feature < 0
    assert t.counts[leaves].sum(axis=1).min() >= 5


def test_predictions_match_path_oracle(rng):
    X, y = consistent_data(rng)
    t = train_tree(X, y)
    probes = rng.random((20, 3)) * 50
    leaves = [trace(t, p) for p in probes]
    assert t.apply(probes).tolist() == leaves
    labels, scores = t.predict_batch(probes)
    for leaf, l, s in zip(leaves, labels, scores):
        b, m = t.counts[leaf]
        assert s == m / (b + m)
        assert l == (1 if m > b else 0)


def test_every_leaf_has_counts_and_internal_nodes_two_children(rng):
    X, y = consistent_data(rng)
    t = train_tree(X, y)
    internal = t.feature >= 0
    assert np.all(t.left[internal] > 0) and np.all(t.right[internal] > 0)
    assert np.all(t.counts.sum(axis=1) > 0)


def test_monotone_transform_invariance(rng):
    X, y = consistent_data(rng)
    probes = rng.random((30, 3)) * 50
    a = train_tree(X, y).labels(probes)
    b = train_tree(np.exp(X / 10), y).labels(np.exp(probes / 10))
    assert np.array_equal(a, b)


def test_tree_explain_text(rng):
    t = train_tree(np.array([[1.0], [2.0], [8.0], [9.0]]), [0, 0, 1, 1], TreeParams(min_leaf=1))
    lines = t.explain(["cyclesct"]).splitlines()
    assert lines[0] == "if cyclesct <= 5.0"
    assert lines[1].strip().startswith("then class 0")
    assert lines[2].strip().startswith("else class 1")


def test_bagged_votes_example():
    leaf0 = train_tree(np.zeros((2, 1)), [0, 0])
    leaf1 = train_tree(np.zeros((2, 1)), [1, 1])
    p = BaggedModel([leaf1, leaf1, leaf0]).predict([0.0])
    assert p.label == 1 and p.score == pytest.approx(2 / 3)
    # an even split is a tie and goes benign
    assert BaggedModel([leaf1, leaf0]).predict([0.0]).label == 0


def test_bagged_t1_no_bootstrap_equals_tree(rng):
    X, y = consistent_data(rng)
    t = train_tree(X, y)
    bag = train_bagged(X, y, T=1, bootstrap=False)
    probes = rng.random((50, 3)) * 50
    assert np.array_equal(bag.labels(probes), t.labels(probes))


def test_bagged_matches_tally_oracle(rng):
    X, y = consistent_data(rng)
    bag = train_bagged(X, y, T=7, seed=3)
    probes = rng.random((20, 3)) * 50
    labels, scores = bag.predict_batch(probes)
    for p, l, s in zip(probes, labels, scores):
        votes = sum(tree.predict(p).label for tree in bag.trees)
        assert s == votes / 7 and l == (1 if votes > 3.5 else 0)


def test_bagged_deterministic(rng):
    X, y = consistent_data(rng)
    a = train_bagged(X, y, T=5, seed=11)
    b = train_bagged(X, y, T=5, seed=11)
    assert a.to_params() == b.to_params()


def test_bagged_bad_t(rng):
    with pytest.raises(ConfigError):
        train_bagged(np.zeros((2, 1)), [0, 1], T=0)


def test_dimension_mismatch(rng):
    X, y = consistent_data(rng)
    with pytest.raises(DimensionError):
        train_tree(X, y).predict(np.zeros(4))
