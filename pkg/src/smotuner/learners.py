"""Six classifiers behind one train/score/predict interface.

The estimators are scikit-learn's, frozen to the settings below; the rig
never tunes them. Scores are probabilities of the positive class except for
svm, which scores by signed margin. predict() is always score-vs-threshold
(0.5 for probabilities, 0 for margins), so predict and score can never
disagree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.linear_model import LogisticRegression, SGDClassifier
from sklearn.naive_bayes import GaussianNB
from sklearn.neighbors import KNeighborsClassifier
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler
from sklearn.tree import DecisionTreeClassifier

from .data import Dataset

LEARNER_KINDS = ("rf", "lr", "knn", "nb", "dt", "svm")
KNN_NEIGHBORS = 8
NB_VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class LearnerSpec:
    kind: str
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in LEARNER_KINDS:
            raise ValueError(f"unknown learner kind {self.kind!r}")


@dataclass(eq=False)
class Model:
    kind: str
    estimator: object
    feature_count: int
    threshold: float


def _build(spec: LearnerSpec, n_train: int):
    # scikit-learn accepts only 32-bit seeds
    seed32 = spec.seed % (2**32)
    if spec.kind == "rf":
        return RandomForestClassifier(
            n_estimators=100,
            criterion="entropy",
            bootstrap=True,
            max_features="sqrt",
            min_samples_leaf=1,
            random_state=seed32,
            n_jobs=1,
        )
    if spec.kind == "lr":
        return LogisticRegression(C=1.0, penalty="l2", solver="lbfgs", max_iter=1000, tol=1e-6)
    if spec.kind == "knn":
        return KNeighborsClassifier(
            n_neighbors=min(KNN_NEIGHBORS, n_train),
            metric="euclidean",
            algorithm="brute",
        )
    if spec.kind == "nb":
        return GaussianNB()
    if spec.kind == "dt":
        return DecisionTreeClassifier(
            criterion="entropy", min_samples_leaf=1, random_state=seed32
        )
    # linear svm: hinge loss by epoch-shuffled stochastic subgradient descent,
    # standardized internally (invisible to callers)
    return make_pipeline(
        StandardScaler(),
        SGDClassifier(
            loss="hinge",
            alpha=1e-4,
            max_iter=200,
            tol=None,
            shuffle=True,
            random_state=seed32,
        ),
    )


def train(spec: LearnerSpec, d: Dataset) -> Model:
    """Fit spec's classifier on d. Deterministic for a fixed (spec, d)."""
    if len(d) == 0:
        raise ValueError("cannot train on an empty dataset")
    if np.unique(d.labels).size < 2:
        raise ValueError("training data has a single class")
    estimator = _build(spec, n_train=len(d))
    estimator.fit(d.rows, d.labels)
    if spec.kind == "nb":
        # absolute variance floor so constant features cannot zero a likelihood
        estimator.var_ = np.maximum(estimator.var_, NB_VARIANCE_FLOOR)
    threshold = 0.0 if spec.kind == "svm" else 0.5
    return Model(
        kind=spec.kind,
        estimator=estimator,
        feature_count=d.rows.shape[1],
        threshold=threshold,
    )


def score_all(m: Model, rows: np.ndarray) -> np.ndarray:
    """Score a batch of instances; higher = more likely positive."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != m.feature_count:
        raise ValueError(
            f"expected instances with {m.feature_count} features, got shape {rows.shape}"
        )
    if m.kind == "svm":
        return np.asarray(m.estimator.decision_function(rows), dtype=float)
    proba = m.estimator.predict_proba(rows)
    classes = list(m.estimator.classes_)
    return np.asarray(proba[:, classes.index(True)], dtype=float)


def score(m: Model, instance: Sequence[float]) -> float:
    return float(score_all(m, np.asarray(instance, dtype=float).reshape(1, -1))[0])


def predict_all(m: Model, rows: np.ndarray) -> np.ndarray:
    return score_all(m, rows) >= m.threshold


def predict(m: Model, instance: Sequence[float]) -> bool:
    return bool(score(m, instance) >= m.threshold)
