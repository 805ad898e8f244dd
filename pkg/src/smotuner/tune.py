"""Differential evolution over SMOTE's (k, m, r) space.

The optimizer evolves a frontier of n candidates. Each generation, every
member is challenged by a mutant built from three other random members
(new_j = x_j + f * (z_j - y_j), applied per coordinate with probability cf);
strictly better mutants replace their member, and any strict improvement on
the all-time best grants one extra generation ("lives"). DE runs in the
continuous relaxation; positions are decoded (rounded, grid-snapped, clamped)
on evaluation and never re-snapped in place.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import learners, metrics
from .data import Dataset, concat
from .metrics import MeasureKind, UndefinedMetricError
from .resample import M_GRID, SmoteParams, smote
from .seeding import derive_seed

# (k, m, r) tuning ranges
SMOTE_BOUNDS = ((1.0, 20.0), (50.0, 400.0), (0.1, 5.0))

# fitness(position, generation, member_index) -> value to maximize
FitnessFn = Callable[[np.ndarray, int, int], float]


class DegenerateFoldError(ValueError):
    """A tuning fold is unusable (single-class); the caller may re-split."""


@dataclass(frozen=True)
class DeConfig:
    n: int = 10
    cf: float = 0.3
    f: float = 0.7
    lives: int = 1

    def __post_init__(self) -> None:
        if self.n < 4:
            raise ValueError("population size must be at least 4")
        if not 0 < self.cf < 1:
            raise ValueError("crossover probability must be in (0, 1)")
        if not 0 < self.f < 2:
            raise ValueError("differential weight must be in (0, 2)")
        if self.lives < 1:
            raise ValueError("initial lives must be at least 1")


@dataclass
class Candidate:
    position: np.ndarray
    fitness: float | None = None


def decode(c: Candidate) -> SmoteParams:
    """Total map from any position to legal SmoteParams.

    k rounds and clamps to [1, 20]; m snaps to the nearest grid value (ties
    toward the smaller); r clamps to [0.1, 5.0].
    """
    pos = np.asarray(c.position, dtype=float)
    k = int(np.clip(round(float(pos[0])), 1, 20))
    m = min(M_GRID, key=lambda g: (abs(g - pos[1]), g))
    r = float(np.clip(pos[2], 0.1, 5.0))
    return SmoteParams(k=k, m=m, r=r)


def de_optimize(
    bounds: Sequence[tuple[float, float]],
    fitness: FitnessFn,
    cfg: DeConfig = DeConfig(),
    seed: int = 0,
    on_generation: Callable[[int, float], None] | None = None,
) -> Candidate:
    """Maximize fitness over the box `bounds`; returns the all-time best.

    The run lasts while lives remain: lives start at cfg.lives, drop by one
    per generation, and each strict improvement of the all-time best earns
    one back. Deterministic for a fixed seed. The fitness callable receives
    (position, generation, member_index) so its own seeding can be keyed by
    where the evaluation happens rather than when.
    """
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in bounds], dtype=float)
    highs = np.array([hi for _, hi in bounds], dtype=float)
    dim = len(bounds)
    n = cfg.n

    positions = rng.uniform(lows, highs, size=(n, dim))
    frontier = [Candidate(positions[i].copy()) for i in range(n)]
    for i, member in enumerate(frontier):
        member.fitness = float(fitness(member.position, 0, i))
    best = frontier[0]

    lives = cfg.lives
    generation = 0
    while lives > 0:
        lives -= 1
        generation += 1
        tmp: list[Candidate] = []
        for i, old in enumerate(frontier):
            others = [j for j in range(n) if j != i]
            picks = rng.choice(len(others), size=3, replace=False)
            x, y, z = (frontier[others[int(p)]].position for p in picks)
            new_pos = old.position.copy()
            for j in range(dim):
                if rng.random() < cfg.cf:
                    new_pos[j] = x[j] + cfg.f * (z[j] - y[j])
            new = Candidate(new_pos, float(fitness(new_pos, generation, i)))
            winner = new if new.fitness > old.fitness else old
            tmp.append(winner)
            if winner.fitness > best.fitness:
                best = winner
                lives += 1
        frontier = tmp
        if on_generation is not None:
            on_generation(generation, best.fitness)
    return best


def _goal_value(
    goal: MeasureKind, model: learners.Model, holdout: Dataset
) -> float:
    scores = learners.score_all(model, holdout.rows)
    predicted = scores >= model.threshold
    try:
        return metrics.measure_value(goal, scores, predicted, holdout.labels)
    except UndefinedMetricError:
        # only precision can be undefined on a two-class holdout; score it worst
        return 0.0 if goal.larger_is_better else 1.0


def smotuned_candidate(
    train_folds: Sequence[Dataset],
    spec: learners.LearnerSpec,
    goal: MeasureKind,
    cfg: DeConfig = DeConfig(),
    seed: int = 0,
) -> Candidate:
    """DE search returning the raw best candidate (direction-normalized fitness)."""
    if len(train_folds) < 2:
        raise ValueError("need at least two folds (training + validation)")
    validation = train_folds[-1]
    training = concat(train_folds[:-1])
    if np.unique(training.labels).size < 2:
        raise DegenerateFoldError("tuning training folds contain a single class")
    if np.unique(validation.labels).size < 2:
        raise DegenerateFoldError("tuning validation fold contains a single class")

    def fitness(position: np.ndarray, generation: int, member: int) -> float:
        params = decode(Candidate(position))
        resampled = smote(training, params, seed=derive_seed(seed, "smote", generation, member))
        model = learners.train(
            replace(spec, seed=derive_seed(seed, "train", generation, member)), resampled
        )
        value = _goal_value(goal, model, validation)
        return value if goal.larger_is_better else -value

    return de_optimize(SMOTE_BOUNDS, fitness, cfg, seed=derive_seed(seed, "de"))


def smotuned(
    train_folds: Sequence[Dataset],
    spec: learners.LearnerSpec,
    goal: MeasureKind,
    cfg: DeConfig = DeConfig(),
    seed: int = 0,
) -> SmoteParams:
    """Tune SMOTE's (k, m, r) for spec on the given folds.

    The last fold is the validation set and is never resampled; candidates
    are scored by resampling the remaining folds, training spec on the
    result, and evaluating `goal` on the validation fold (negated when the
    goal is minimized). Single-class folds raise DegenerateFoldError so the
    caller can re-split and retry.
    """
    return decode(smotuned_candidate(train_folds, spec, goal, cfg, seed))
