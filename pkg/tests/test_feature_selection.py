import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpcmd.core import ConfigError, DataError
from hpcmd.dataset import Dataset
from hpcmd.feature_selection import (discretize, mutual_information, rank_scores, score_features,
                                     select_k_best, selection_report)


def mi_oracle(x, y):
    """Term-by-term sum over the joint table."""
    n = len(x)
    joint = {}
    for a, b in zip(x, y):
        joint[(a, b)] = joint.get((a, b), 0) + 1
    px = {a: sum(1 for v in x if v == a) / n for a in set(x)}
    py = {b: sum(1 for v in y if v == b) / n for b in set(y)}
    return sum(c / n * math.log2((c / n) / (px[a] * py[b])) for (a, b), c in joint.items())


def entropy(x):
    n = len(x)
    return -sum(x.count(v) / n * math.log2(x.count(v) / n) for v in set(x))


def test_mi_of_fair_bit_with_itself():
    x = [0, 1] * 8
    assert mutual_information(x, x) == pytest.approx(1.0)


def test_mi_constant_label_is_zero():
    assert mutual_information([0, 1, 2, 0, 1, 2], [1] * 6) == 0.0


def test_mi_joint_table_example():
    x = [0] * 5 + [1] * 5
    y = [0, 0, 0, 0, 1, 0, 1, 1, 1, 1]
    expected = 2 * 0.4 * math.log2(0.4 / 0.25) + 2 * 0.1 * math.log2(0.1 / 0.25)
    assert mutual_information(x, y) == pytest.approx(expected, abs=1e-12)
    assert mutual_information(x, y) == pytest.approx(mi_oracle(x, y), abs=1e-12)


@pytest.mark.parametrize("x,y", [([], []), ([1, 2], [1])])
def test_mi_bad_input(x, y):
    with pytest.raises(DataError):
        mutual_information(x, y)


@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 2)), min_size=1, max_size=60))
def test_mi_properties(pairs):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    mi = mutual_information(x, y)
    assert mi == pytest.approx(mi_oracle(x, y), abs=1e-9)
    assert mi == pytest.approx(mutual_information(y, x), abs=1e-12)
    assert -1e-12 <= mi <= min(entropy(x), entropy(y)) + 1e-9


def test_discretize_examples():
    assert discretize([1, 2, 3, 4], 2).tolist() == [0, 0, 1, 1]
    assert discretize([9, 3, 7], 1).tolist() == [0, 0, 0]
    assert len(set(discretize([5, 5, 5, 5], 2).tolist())) == 1


def test_discretize_errors():
    with pytest.raises(DataError):
        discretize([], 3)
    with pytest.raises(ConfigError):
        discretize([1, 2], 0)


@settings(max_examples=50)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=80), st.integers(1, 20))
def test_discretize_properties(values, bins):
    ids = discretize(values, bins)
    assert ids.min() >= 0 and ids.max() < bins
    # ties stay together and bins respect value order
    for a, ia in zip(values, ids):
        for b, ib in zip(values, ids):
            if a == b:
                assert ia == ib
            elif a < b:
                assert ia <= ib


def test_rank_scores_example():
    assert rank_scores([0.5, 0.1, 0.9, 0.3, 0.7], 4) == (2, 4, 0, 3)
    assert rank_scores([0.2, 0.2, 0.2], 2) == (0, 1)


def _ds(rng, n=400):
    y = rng.integers(0, 2, n)
    X = np.column_stack([rng.random(n) * 10, y * 100 + rng.random(n), rng.random(n), rng.random(n)])
    return Dataset(X, y, [""] * n, ("a", "b", "c", "d"))


def test_select_finds_label_feature(rng):
    r = select_k_best(_ds(rng), k=2)
    assert r.kept_indices[0] == 1
    assert len(r.kept_indices) == 2 and len(r.all_scores) == 4


def test_select_k_equals_feature_count(rng):
    r = select_k_best(_ds(rng), k=4)
    assert sorted(r.kept_indices) == [0, 1, 2, 3]


def test_select_k_too_large(rng):
    with pytest.raises(ConfigError):
        select_k_best(_ds(rng), k=5)


def test_select_monotone_transform_and_permutation_invariant(rng):
    ds = _ds(rng)
    base = [s.score for s in score_features(ds.X, ds.y)]
    warped = np.column_stack([np.exp(ds.X[:, 0]), ds.X[:, 1] ** 3, 2 * ds.X[:, 2] + 1, np.sqrt(ds.X[:, 3])])
    assert [s.score for s in score_features(warped, ds.y)] == pytest.approx(base, abs=1e-12)
    perm = rng.permutation(len(ds))
    assert [s.score for s in score_features(ds.X[perm], ds.y[perm])] == pytest.approx(base, abs=1e-12)


def test_selection_report_sorted(rng):
    ds = _ds(rng)
    lines = selection_report(select_k_best(ds, 4), ds.feature_names).splitlines()
    assert lines[0] == "feature_name,score_bits"
    assert lines[1].startswith("b,")
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert vals == sorted(vals, reverse=True)
