"""Evaluation metrics: ranking AUC, average precision, weighted P/R/F1.

The binary metrics are computed from ranks rather than a thresholded curve:
AUC is the Mann-Whitney statistic with averaged ranks for tied scores, and
average precision sums precision over recall increments taken at descending
score thresholds (tied scores form one threshold group).  Multi-class
reports weight per-class precision/recall by class support and combine the
two weighted values harmonically into F1.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import MetricError, ZeroDivisionMetricWarning


def average_ranks(values) -> np.ndarray:
    """1-based ranks of `values`; tied entries share the mean of their positions."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    ranks_sorted = np.arange(1, n + 1, dtype=np.float64)
    starts = np.flatnonzero(np.r_[True, sorted_vals[1:] != sorted_vals[:-1]])
    ends = np.r_[starts[1:], n]
    for s, e in zip(starts, ends):
        if e - s > 1:
            ranks_sorted[s:e] = (s + 1 + e) / 2.0
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = ranks_sorted
    return ranks


def _check_binary(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or labels.shape != scores.shape:
        raise MetricError("scores and labels must be 1-d arrays of equal length")
    if len(scores) == 0:
        raise MetricError("score set is empty")
    if not np.all(np.isfinite(scores)):
        raise MetricError("scores must be finite")
    if not np.isin(labels, (0, 1)).all():
        raise MetricError("labels must be 0 or 1")
    labels = labels.astype(np.int64)
    if labels.min() == labels.max():
        raise MetricError("both classes must be present to rank scores")
    return scores, labels


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via the rank-sum formulation."""
    scores, labels = _check_binary(scores, labels)
    ranks = average_ranks(scores)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def average_precision(scores, labels) -> float:
    """AP as the recall-weighted sum of precision at descending thresholds."""
    scores, labels = _check_binary(scores, labels)
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    hits = labels[order]
    n = len(hits)
    # one threshold per distinct score; a group ends where the value changes
    group_ends = np.r_[np.flatnonzero(sorted_scores[1:] != sorted_scores[:-1]), n - 1]
    cum_tp = np.cumsum(hits)
    n_pos = int(labels.sum())
    ap = 0.0
    prev_recall = 0.0
    for e in group_ends:
        tp = float(cum_tp[e])
        recall = tp / n_pos
        precision = tp / (e + 1)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return ap


@dataclass(frozen=True)
class BinaryScores:
    """Scores with ground-truth 0/1 labels, as produced by an evaluation pass."""

    scores: np.ndarray
    labels: np.ndarray

    def roc_auc(self) -> float:
        return roc_auc(self.scores, self.labels)

    def average_precision(self) -> float:
        return average_precision(self.scores, self.labels)


@dataclass(frozen=True)
class PerClassMetrics:
    label: int
    support: int
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {"label": self.label, "support": self.support,
                "precision": self.precision, "recall": self.recall,
                "f1": self.f1}


def _safe_div(num, den, flags):
    if den == 0:
        flags.append(True)
        return 0.0
    return num / den


def weighted_prf(y_true, y_pred):
    """Support-weighted precision/recall and their harmonic-mean F1.

    Returns ``(accuracy, precision_w, recall_w, f1_w, per_class,
    had_zero_division)``.  Any zero denominator yields 0 for the affected
    value, sets the flag and emits :class:`ZeroDivisionMetricWarning`.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise MetricError("y_true and y_pred must be 1-d arrays of equal length")
    if len(y_true) == 0:
        raise MetricError("prediction set is empty")

    classes = np.union1d(np.unique(y_true), np.unique(y_pred))
    flags: list = []
    per_class = []
    for c in classes:
        tp = int(np.sum((y_true == c) & (y_pred == c)))
        support = int(np.sum(y_true == c))
        predicted = int(np.sum(y_pred == c))
        precision = _safe_div(tp, predicted, flags)
        recall = _safe_div(tp, support, flags)
        f1 = _safe_div(2 * precision * recall, precision + recall, flags)
        per_class.append(PerClassMetrics(int(c), support, precision, recall, f1))

    total = sum(pc.support for pc in per_class)
    precision_w = _safe_div(sum(pc.support * pc.precision for pc in per_class),
                            total, flags)
    recall_w = _safe_div(sum(pc.support * pc.recall for pc in per_class),
                         total, flags)
    f1_w = _safe_div(2 * precision_w * recall_w, precision_w + recall_w, flags)
    accuracy = float(np.mean(y_true == y_pred))

    had_zero_division = bool(flags)
    if had_zero_division:
        warnings.warn("a metric denominator was zero; reported the value as 0",
                      ZeroDivisionMetricWarning, stacklevel=2)
    return accuracy, precision_w, recall_w, f1_w, per_class, had_zero_division


@dataclass
class MetricReport:
    """All metrics produced by one evaluation, JSON-serializable.

    Link prediction fills ``auc``/``ap``; node classification fills either
    ``auc`` (binary labels) or the accuracy + weighted trio.
    """

    auc: float | None = None
    ap: float | None = None
    accuracy: float | None = None
    weighted_precision: float | None = None
    weighted_recall: float | None = None
    weighted_f1: float | None = None
    per_class: list = field(default_factory=list)
    had_zero_division: bool = False

    def to_json(self) -> dict:
        return {"auc": self.auc, "ap": self.ap, "accuracy": self.accuracy,
                "weighted_precision": self.weighted_precision,
                "weighted_recall": self.weighted_recall,
                "weighted_f1": self.weighted_f1,
                "per_class": [pc.to_json() for pc in self.per_class],
                "had_zero_division": self.had_zero_division}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def for_binary(cls, scores, labels) -> "MetricReport":
        return cls(auc=roc_auc(scores, labels),
                   ap=average_precision(scores, labels))

    @classmethod
    def for_classification(cls, y_true, y_pred) -> "MetricReport":
        acc, p, r, f1, per_class, flagged = weighted_prf(y_true, y_pred)
        return cls(accuracy=acc, weighted_precision=p, weighted_recall=r,
                   weighted_f1=f1, per_class=per_class,
                   had_zero_division=flagged)
