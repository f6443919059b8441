"""Single-feature interval rule lists: classic OneR and the many-rules variant.

A rule list picks one feature and partitions its range into intervals
``lower < x <= upper``. The first interval starts (exclusively) at the
smallest training value and the last one is open to +inf; inputs at or
below the first lower bound fall to ``default_label``. Many-rules models may
also carry exact-value base cases that are checked before the intervals.
"""
import math
import re
from dataclasses import dataclass

import numpy as np

from .core import BENIGN, MALWARE, ConfigError, DataError, TrainedModel, check_binary_labels, majority_label
from .feature_selection import discretize

CLASSIC_BINS = 8
BASE_CASE_MIN_SUPPORT = 5


@dataclass(frozen=True)
class RuleInterval:
    feature_index: int
    lower: float  # exclusive
    upper: float  # inclusive, may be +inf
    label: int
    support: int
    purity: float

    def contains(self, x):
        return self.lower < x <= self.upper

    @property
    def score(self):
        return self.purity if self.label == MALWARE else 1.0 - self.purity


@dataclass(frozen=True)
class BaseCase:
    value: float
    label: int
    support: int


def _interval(feature, lower, upper, n_benign, n_malware):
    label = majority_label(n_benign, n_malware)
    support = n_benign + n_malware
    return RuleInterval(feature, float(lower), float(upper), label, support,
                        max(n_benign, n_malware) / support)


def _merge(feature, pieces):
    """Join neighbouring (lower, upper, n_benign, n_malware) pieces that share a majority label."""
    merged = []
    for lo, hi, b, m in pieces:
        if merged and majority_label(merged[-1][2], merged[-1][3]) == majority_label(b, m):
            plo, _, pb, pm = merged[-1]
            merged[-1] = (plo, hi, pb + b, pm + m)
        else:
            merged.append((lo, hi, b, m))
    return tuple(_interval(feature, *p) for p in merged)


def _rule_list(feature, pieces):
    """Merged intervals plus the default label for inputs at or below the minimum.

    A leading piece that holds only the minimum value has an empty interval;
    it is dropped and its majority becomes the default label instead.
    """
    pieces = list(pieces)
    default = None
    if len(pieces) > 1 and pieces[0][0] == pieces[0][1]:
        _, _, b, m = pieces.pop(0)
        default = majority_label(b, m)
    return _merge(feature, pieces), default


class RuleListModel(TrainedModel):
    def __init__(self, kind, feature_index, intervals, n_features, feature_names=None,
                 base_cases=(), default_label=None, feature_accuracies=()):
        if kind not in ("oner", "many_rules_oner"):
            raise ConfigError(f"unknown rule list kind {kind!r}")
        intervals = tuple(intervals)
        if not intervals:
            raise ConfigError("a rule list needs at least one interval")
        for a, b in zip(intervals, intervals[1:]):
            if not (a.upper == b.lower and a.label != b.label):
                raise ConfigError("intervals must be adjacent and alternate labels")
        if any(not iv.lower < iv.upper for iv in intervals) or intervals[-1].upper != math.inf:
            raise ConfigError("intervals must be non-empty and end at +inf")
        self.kind = kind
        self.model_type = kind
        self.feature_index = int(feature_index)
        self.intervals = intervals
        self.base_cases = tuple(sorted(base_cases, key=lambda c: c.value))
        self.default_label = intervals[0].label if default_label is None else int(default_label)
        self.n_features = int(n_features)
        self.feature_names = tuple(feature_names or (f"x{j}" for j in range(self.n_features)))
        self.feature_accuracies = tuple(float(a) for a in feature_accuracies)
        self._uppers = np.array([iv.upper for iv in intervals])
        self._labels = np.array([iv.label for iv in intervals], dtype=np.int64)
        self._scores = np.array([iv.score for iv in intervals])

    @property
    def n_rules(self):
        return len(self.intervals) + len(self.base_cases)

    @property
    def feature_name(self):
        return self.feature_names[self.feature_index]

    def __eq__(self, other):
        if not isinstance(other, RuleListModel):
            return NotImplemented
        return (self.kind, self.feature_index, self.intervals, self.base_cases, self.default_label,
                self.n_features, self.feature_names, self.feature_accuracies) == (
            other.kind, other.feature_index, other.intervals, other.base_cases, other.default_label,
            other.n_features, other.feature_names, other.feature_accuracies)

    __hash__ = None

    def _scores_labels(self, X):
        v = X[:, self.feature_index]
        pos = np.searchsorted(self._uppers, v, side="left")
        pos = np.minimum(pos, len(self.intervals) - 1)
        labels = self._labels[pos].copy()
        scores = self._scores[pos].copy()
        below = ~(v > self.intervals[0].lower)
        labels[below] = self.default_label
        scores[below] = 0.5
        for case in self.base_cases:
            hit = v == case.value
            labels[hit] = case.label
            scores[hit] = float(case.label)
        return scores, labels

    def explain(self):
        name = self.feature_name
        lines = [f"model {self.kind} n_features={self.n_features} "
                 f"feature_index={self.feature_index} default={self.default_label}"]
        lines.append("features " + ",".join(self.feature_names))
        for fname, acc in zip(self.feature_names, self.feature_accuracies):
            lines.append(f"feature {fname}: train_acc={acc!r}")
        for c in self.base_cases:
            lines.append(f"if {name} == {c.value!r} then {c.label}  # support={c.support}")
        for iv in self.intervals:
            lines.append(f"if {iv.lower!r} < {name} <= {iv.upper!r} then {iv.label}"
                         f"  # support={iv.support} purity={iv.purity!r}")
        return "\n".join(lines) + "\n"

    def to_params(self):
        return {
            "kind": self.kind, "feature_index": self.feature_index, "n_features": self.n_features,
            "feature_names": list(self.feature_names), "default_label": self.default_label,
            "feature_accuracies": list(self.feature_accuracies),
            "base_cases": [[c.value, c.label, c.support] for c in self.base_cases],
            "intervals": [[iv.lower, None if iv.upper == math.inf else iv.upper, iv.label,
                           iv.support, iv.purity] for iv in self.intervals],
        }

    @classmethod
    def from_params(cls, p):
        f = p["feature_index"]
        intervals = [RuleInterval(f, lo, math.inf if hi is None else hi, lab, sup, pur)
                     for lo, hi, lab, sup, pur in p["intervals"]]
        bases = [BaseCase(v, lab, sup) for v, lab, sup in p["base_cases"]]
        return cls(p["kind"], f, intervals, p["n_features"], p["feature_names"], bases,
                   p["default_label"], p["feature_accuracies"])


_HEAD = re.compile(r"model (\S+) n_features=(\d+) feature_index=(\d+) default=([01])$")
_ACC = re.compile(r"feature (.+): train_acc=(\S+)$")
_BASE = re.compile(r"if (.+) == (\S+) then ([01])  # support=(\d+)$")
_RULE = re.compile(r"if (\S+) < (.+) <= (\S+) then ([01])  # support=(\d+) purity=(\S+)$")


def parse_explain(text):
    """Rebuild a :class:`RuleListModel` from :meth:`RuleListModel.explain` output."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataError("empty rule text")
    head = _HEAD.match(lines[0])
    if not head:
        raise DataError("rule text: bad header line")
    kind, n_features, fidx, default = head.group(1), int(head.group(2)), int(head.group(3)), int(head.group(4))
    if len(lines) < 2 or not lines[1].startswith("features "):
        raise DataError("rule text: missing feature list")
    names = lines[1][len("features "):].split(",")
    accs, bases, intervals = [], [], []
    for ln in lines[2:]:
        if m := _ACC.match(ln):
            accs.append(float(m.group(2)))
        elif m := _BASE.match(ln):
            bases.append(BaseCase(float(m.group(2)), int(m.group(3)), int(m.group(4))))
        elif m := _RULE.match(ln):
            intervals.append(RuleInterval(fidx, float(m.group(1)), float(m.group(3)), int(m.group(4)),
                                          int(m.group(5)), float(m.group(6))))
        else:
            raise DataError(f"rule text: cannot parse line {ln!r}")
    return RuleListModel(kind, fidx, intervals, n_features, names, bases, default, accs)


def _check_xy(X, y, allow_single_class=False):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.size:
        raise DataError("rule training needs a non-empty training set")
    if not allow_single_class:
        check_binary_labels(y)
    return X, y


# --------------------------------------------------------------------------
# classic OneR
# --------------------------------------------------------------------------

def oner_buckets(v, y, bins=CLASSIC_BINS):
    """Quantile buckets of one feature as (lower, upper, n_benign, n_malware) pieces."""
    ids = discretize(v, bins)
    pieces = []
    lower = float(v.min())
    for k in np.unique(ids):
        in_k = ids == k
        m = int(y[in_k].sum())
        upper = float(v[in_k].max())
        pieces.append((lower, upper, int(in_k.sum()) - m, m))
        lower = upper
    lo, _, b, m = pieces[-1]
    pieces[-1] = (lo, math.inf, b, m)
    return pieces


def train_classic_oner(X, y, bins=CLASSIC_BINS, feature_names=None):
    """Pick the feature whose bucket-majority rules make the fewest training errors."""
    X, y = _check_xy(X, y, allow_single_class=True)
    n = y.size
    per_feature = []
    for j in range(X.shape[1]):
        pieces = oner_buckets(X[:, j], y, bins)
        errors = sum(min(b, m) for _, _, b, m in pieces)
        per_feature.append((errors, pieces))
    best = min(range(len(per_feature)), key=lambda j: (per_feature[j][0], j))
    accs = [1.0 - e / n for e, _ in per_feature]
    intervals, default = _rule_list(best, per_feature[best][1])
    return RuleListModel("oner", best, intervals, X.shape[1], feature_names,
                         default_label=default, feature_accuracies=accs)


# --------------------------------------------------------------------------
# many-rules variant
# --------------------------------------------------------------------------

def find_base_cases(v, y, min_support=BASE_CASE_MIN_SUPPORT):
    """Exact values seen at least ``min_support`` times, always with the same class."""
    values, inverse, counts = np.unique(v, return_inverse=True, return_counts=True)
    malware = np.bincount(inverse, weights=y, minlength=values.size)
    cases = []
    for val, c, m in zip(values, counts, malware):
        if c >= min_support and (m == 0 or m == c):
            cases.append(BaseCase(float(val), MALWARE if m == c else BENIGN, int(c)))
    return cases


def many_rules_cuts(sv, sy):
    """Cut positions for a (value, label)-sorted feature column.

    A cut goes before position i when the class changes after a run of the
    previous class of length >= 2. If equal values straddle that point the
    cut waits for the next strictly larger value.
    """
    cuts = []
    run = 1
    pending = False
    for i in range(1, sy.size):
        if sy[i] == sy[i - 1]:
            run += 1
        else:
            if run >= 2:
                pending = True
            run = 1
        if pending and sv[i] > sv[i - 1]:
            cuts.append(i)
            pending = False
    return cuts


def many_rules_pieces(v, y):
    """(lower, upper, n_benign, n_malware) pieces before merging."""
    order = np.lexsort((y, v))
    sv, sy = v[order], y[order]
    bounds = [0] + many_rules_cuts(sv, sy) + [sv.size]
    pieces = []
    lower = float(sv[0])
    for a, b in zip(bounds, bounds[1:]):
        m = int(sy[a:b].sum())
        upper = float(sv[b - 1]) if b < sv.size else math.inf
        pieces.append((lower, upper, (b - a) - m, m))
        lower = upper
    return pieces


def _many_rules_for_feature(v, y, min_support):
    bases = find_base_cases(v, y, min_support)
    keep = ~np.isin(v, [c.value for c in bases])
    if not keep.any():
        # every value is a base case; fall back to plain intervals
        bases = []
        keep[:] = True
    pieces = many_rules_pieces(v[keep], y[keep])
    correct = sum(c.support for c in bases) + sum(max(b, m) for _, _, b, m in pieces)
    return correct / y.size, bases, pieces


def train_many_rules(X, y, feature_names=None, min_support=BASE_CASE_MIN_SUPPORT):
    """Many interval rules on the single feature with the best training accuracy."""
    X, y = _check_xy(X, y)
    results = [_many_rules_for_feature(X[:, j], y, min_support) for j in range(X.shape[1])]
    best = min(range(len(results)), key=lambda j: (-results[j][0], j))
    _, bases, pieces = results[best]
    intervals, default = _rule_list(best, pieces)
    return RuleListModel("many_rules_oner", best, intervals, X.shape[1], feature_names,
                         bases, default, feature_accuracies=[r[0] for r in results])


def rules_predict(model, x):
    return model.predict(x)
