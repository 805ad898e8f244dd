"""Evaluation measures: confusion counts, recall, precision, false alarm, AUC.

Zero-denominator cases raise UndefinedMetricError instead of silently
returning 0, so callers can record those cells as missing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np


class UndefinedMetricError(ValueError):
    """A measure's denominator is empty (e.g. recall with no actual positives)."""


class MeasureKind(str, Enum):
    RECALL = "recall"
    PRECISION = "precision"
    FALSE_ALARM = "false_alarm"
    AUC = "auc"

    @property
    def larger_is_better(self) -> bool:
        # false alarm is the only measure minimized
        return self is not MeasureKind.FALSE_ALARM


ALL_MEASURES = tuple(MeasureKind)


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(predicted: Sequence[bool], actual: Sequence[bool]) -> ConfusionMatrix:
    pred = np.asarray(predicted, dtype=bool)
    act = np.asarray(actual, dtype=bool)
    if pred.shape != act.shape or pred.ndim != 1:
        raise ValueError("predicted and actual must be 1-d and the same length")
    if pred.size == 0:
        raise ValueError("empty input")
    return ConfusionMatrix(
        tp=int(np.sum(pred & act)),
        fp=int(np.sum(pred & ~act)),
        tn=int(np.sum(~pred & ~act)),
        fn=int(np.sum(~pred & act)),
    )


def recall(cm: ConfusionMatrix) -> float:
    """Fraction of actual positives predicted positive (pd)."""
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("recall undefined: no actual positives")
    return cm.tp / (cm.tp + cm.fn)


def precision(cm: ConfusionMatrix) -> float:
    """Fraction of predicted positives that are actual positives (prec)."""
    if cm.tp + cm.fp == 0:
        raise UndefinedMetricError("precision undefined: no predicted positives")
    return cm.tp / (cm.tp + cm.fp)


def false_alarm(cm: ConfusionMatrix) -> float:
    """Fraction of actual negatives predicted positive (pf)."""
    if cm.fp + cm.tn == 0:
        raise UndefinedMetricError("false alarm undefined: no actual negatives")
    return cm.fp / (cm.fp + cm.tn)


def auc(scores: Sequence[float], actual: Sequence[bool]) -> float:
    """Area under the ROC curve, computed from midranks.

    Equals the probability that a uniformly random positive outscores a
    uniformly random negative, with ties counting one half (the Mann-Whitney
    statistic), which is also the trapezoidal ROC area.
    """
    s = np.asarray(scores, dtype=float)
    act = np.asarray(actual, dtype=bool)
    if s.shape != act.shape or s.ndim != 1:
        raise ValueError("scores and actual must be 1-d and the same length")
    if s.size == 0:
        raise ValueError("empty input")
    n_pos = int(act.sum())
    n_neg = s.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("auc undefined: need both classes")
    ordered = np.sort(s)
    # midrank = average of the 1-based positions a score's tie group occupies
    ranks = (
        np.searchsorted(ordered, s, side="left")
        + np.searchsorted(ordered, s, side="right")
        + 1
    ) / 2.0
    u = ranks[act].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def measure_value(
    kind: MeasureKind,
    scores: Sequence[float],
    predicted: Sequence[bool],
    actual: Sequence[bool],
) -> float:
    """Evaluate one measure from scores (auc) or predictions (the rest)."""
    if kind is MeasureKind.AUC:
        return auc(scores, actual)
    cm = confusion(predicted, actual)
    if kind is MeasureKind.RECALL:
        return recall(cm)
    if kind is MeasureKind.PRECISION:
        return precision(cm)
    return false_alarm(cm)
