"""Scott-Knott recursive bi-clustering with A12 effect size and bootstrap.

scott_knott sorts treatments by median, finds the contiguous split point
maximizing the expected mean-difference E(delta), and recurses only where the
two sides are distinguishable by BOTH a nonparametric bootstrap test and a
non-small A12 effect; otherwise the treatments share one rank.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .seeding import derive_seed


@dataclass(frozen=True)
class TreatmentSamples:
    label: str
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError(f"treatment {self.label!r} has no values")
        if not all(np.isfinite(values)):
            raise ValueError(f"treatment {self.label!r} has non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def median(self) -> float:
        return float(np.median(self.values))


@dataclass(frozen=True)
class RankedGroups:
    """Groups of treatment labels sharing a rank; groups[0] is rank 1 (best)."""

    groups: tuple[tuple[TreatmentSamples, ...], ...]

    def rank_of(self, label: str) -> int:
        for rank, group in enumerate(self.groups, start=1):
            if any(t.label == label for t in group):
                return rank
        raise KeyError(label)

    def labels(self) -> list[list[str]]:
        return [[t.label for t in group] for group in self.groups]


def a12(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Vargha-Delaney effect size: P(x > y) + 0.5 * P(x == y)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("a12 needs non-empty samples")
    gt = np.sum(x[:, None] > y[None, :])
    eq = np.sum(x[:, None] == y[None, :])
    return float((gt + 0.5 * eq) / (x.size * y.size))


def bootstrap_significant(
    xs: Sequence[float],
    ys: Sequence[float],
    iterations: int = 512,
    confidence: float = 0.99,
    seed: int = 0,
) -> bool:
    """Nonparametric bootstrap test of mean difference at the given confidence.

    Both samples are shifted to the pooled mean (the null), resampled with
    replacement, and the observed |mean(xs) - mean(ys)| is compared against the
    resampled statistics; significant iff fewer than (1 - confidence) of the
    iterations reach it. Deterministic per seed.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size == 0 or y.size == 0:
        raise ValueError("bootstrap needs non-empty samples")
    if iterations < 100:
        raise ValueError("need at least 100 bootstrap iterations")
    observed = abs(x.mean() - y.mean())
    pooled = np.concatenate([x, y]).mean()
    x_null = x - x.mean() + pooled
    y_null = y - y.mean() + pooled
    rng = np.random.default_rng(seed)
    x_means = x_null[rng.integers(0, x.size, size=(iterations, x.size))].mean(axis=1)
    y_means = y_null[rng.integers(0, y.size, size=(iterations, y.size))].mean(axis=1)
    reached = int(np.sum(np.abs(x_means - y_means) >= observed))
    return reached < (1.0 - confidence) * iterations


def split_score(left: Sequence[float], right: Sequence[float]) -> float:
    """E(delta) of splitting the concatenation of left and right at that point:
    |left|/n * (mean(left) - mean(all))^2 + |right|/n * (mean(right) - mean(all))^2.
    """
    l = np.asarray(left, dtype=float)
    r = np.asarray(right, dtype=float)
    n = l.size + r.size
    mu = (l.sum() + r.sum()) / n
    return float(l.size / n * (l.mean() - mu) ** 2 + r.size / n * (r.mean() - mu) ** 2)


def scott_knott(
    treatments: Sequence[TreatmentSamples],
    confidence: float = 0.99,
    a12_threshold: float = 0.6,
    seed: int = 0,
    larger_is_better: bool = True,
) -> RankedGroups:
    """Cluster treatments into ranked groups of indistinguishable performance.

    Treatments are sorted by median (label breaks ties, so input order never
    matters). The best E(delta) split is kept only when the two sides differ
    both significantly (bootstrap) and by a non-small effect
    (max(a12(m,n), a12(n,m)) >= a12_threshold); the effect gate is two-sided
    because either side dominating is a real effect. Bootstrap streams are
    keyed by (seed, split-node path) so recursion order cannot change results.
    """
    if not treatments:
        raise ValueError("need at least one treatment")
    ordered = sorted(treatments, key=lambda t: (t.median, t.label))
    groups: list[tuple[TreatmentSamples, ...]] = []

    def recurse(ts: Sequence[TreatmentSamples], path: tuple[int, ...]) -> None:
        if len(ts) == 1:
            groups.append(tuple(ts))
            return
        best_at, best_score = 1, -np.inf
        for i in range(1, len(ts)):
            left = [v for t in ts[:i] for v in t.values]
            right = [v for t in ts[i:] for v in t.values]
            score = split_score(left, right)
            if score > best_score:
                best_at, best_score = i, score
        left = [v for t in ts[:best_at] for v in t.values]
        right = [v for t in ts[best_at:] for v in t.values]
        significant = bootstrap_significant(
            left, right, confidence=confidence, seed=derive_seed(seed, *path)
        )
        effect = max(a12(left, right), a12(right, left)) >= a12_threshold
        if significant and effect:
            recurse(ts[:best_at], path + (0,))
            recurse(ts[best_at:], path + (1,))
        else:
            groups.append(tuple(ts))

    recurse(ordered, ())
    if larger_is_better:
        groups.reverse()
    return RankedGroups(groups=tuple(groups))
