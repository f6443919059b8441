"""Confusion-matrix metrics, ROC curves and AUC. Malware (1) is the positive class."""
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def confusion(preds, actuals):
    p = np.asarray(preds)
    a = np.asarray(actuals)
    if p.shape != a.shape or p.ndim != 1:
        raise DataError("predictions and labels must be equal-length sequences")
    if p.size == 0:
        raise DataError("cannot build a confusion matrix from no samples")
    if not (np.all(np.isin(p, (0, 1))) and np.all(np.isin(a, (0, 1)))):
        raise DataError("labels must be 0 or 1")
    p = p.astype(bool)
    a = a.astype(bool)
    return ConfusionMatrix(tp=int(np.sum(p & a)), fp=int(np.sum(p & ~a)),
                           tn=int(np.sum(~p & ~a)), fn=int(np.sum(~p & a)))


def _ratio(num, den):
    return num / den if den else 0.0


def accuracy(cm):
    return _ratio(cm.tp + cm.tn, cm.total)


def precision(cm):
    return _ratio(cm.tp, cm.tp + cm.fp)


def recall(cm):
    return _ratio(cm.tp, cm.tp + cm.fn)


def f1(cm):
    # 2PR/(P+R) rewritten over counts, so the result is a single rounding
    return _ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn)


def f1_score(p, r):
    """Harmonic mean of a precision and a recall value."""
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def false_positive_rate(cm):
    return _ratio(cm.fp, cm.fp + cm.tn)


def degenerate_metrics(cm):
    """Names of metrics whose denominator was zero and were reported as 0."""
    flags = []
    if cm.total == 0:
        flags.append("accuracy")
    if cm.tp + cm.fp == 0:
        flags.append("precision")
    if cm.tp + cm.fn == 0:
        flags.append("recall")
    if cm.tp == 0:
        flags.append("f1")
    return tuple(flags)


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # descending; the first entry is +inf

    @property
    def points(self):
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def roc_curve(scores, actuals):
    """One point per distinct score, predicting malware when score >= threshold."""
    s = np.asarray(scores, dtype=np.float64)
    a = np.asarray(actuals)
    if s.shape != a.shape or s.ndim != 1:
        raise DataError("scores and labels must be equal-length sequences")
    pos = int(np.sum(a == 1))
    neg = int(np.sum(a == 0))
    if pos == 0 or neg == 0 or pos + neg != a.size:
        raise DataError("ROC is undefined unless both classes are present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    a_sorted = a[order] == 1
    # last index of each run of equal scores
    last = np.flatnonzero(np.r_[s_sorted[1:] != s_sorted[:-1], True])
    tps = np.cumsum(a_sorted)[last]
    fps = (last + 1) - tps
    tpr = np.r_[0.0, tps / pos]
    fpr = np.r_[0.0, fps / neg]
    thresholds = np.r_[math.inf, s_sorted[last]]
    return RocCurve(fpr, tpr, thresholds)


def auc(curve):
    """Trapezoidal area under the ROC curve."""
    x, y = curve.fpr, curve.tpr
    return float(np.sum((x[1:] - x[:-1]) * (y[1:] + y[:-1]) / 2.0))


def roc_csv_text(curve):
    """``threshold,fpr,tpr`` rows in descending threshold order."""
    g = lambda v: format(float(v), ".17g")
    lines = ["threshold,fpr,tpr"]
    lines += [f"{g(t)},{g(f)},{g(p)}" for t, f, p in zip(curve.thresholds, curve.fpr, curve.tpr)]
    return "\n".join(lines) + "\n"


def write_roc_csv(curve, path):
    Path(path).write_text(roc_csv_text(curve), encoding="utf-8")


@dataclass(frozen=True)
class EvalReport:
    model: str
    confusion: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    degenerate: tuple = ()


def evaluate(name, labels, scores, actuals):
    cm = confusion(labels, actuals)
    try:
        area = auc(roc_curve(scores, actuals))
    except DataError:
        area = float("nan")
    return EvalReport(name, cm, accuracy(cm), precision(cm), recall(cm), f1(cm), area,
                      degenerate_metrics(cm))
