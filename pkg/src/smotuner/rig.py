"""The cross-validation experiment engine.

For each dataset x repeat, instances are shuffled into bins; each bin in turn
is the untouched test set and the remaining bins are the training set, which
each prefilter transforms before training each learner. Every cell records
the raw measure value next to the no-preprocessing baseline for the same
(repeat, bin, learner), so deltas always compare like with like. All
randomness is keyed by (master seed, dataset, repeat, bin, prefilter,
learner), never by execution order, so any scheduling gives bit-identical
results.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import learners, metrics, stats
from .data import Dataset, shuffle_and_bin, subset
from .learners import LEARNER_KINDS, LearnerSpec
from .metrics import ALL_MEASURES, MeasureKind, UndefinedMetricError
from .resample import SmoteParams, mahakil, smote
from .seeding import derive_seed
from .stats import RankedGroups, TreatmentSamples, scott_knott
from .tune import DeConfig, DegenerateFoldError, smotuned

PREFILTERS = ("none", "smote", "smote_tuned", "mahakil")
MODES = ("within", "cross")


@dataclass(frozen=True)
class ExperimentPlan:
    datasets: tuple[Dataset, ...]
    learners: tuple[str, ...] = LEARNER_KINDS
    prefilters: tuple[str, ...] = ("none", "smote", "smote_tuned")
    measures: tuple[MeasureKind, ...] = ALL_MEASURES
    repeats: int = 5
    bins: int = 5
    mode: str = "within"
    control: MeasureKind | None = None
    seed: int = 1
    de: DeConfig = field(default_factory=DeConfig)

    def __post_init__(self) -> None:
        if not self.datasets:
            raise ValueError("plan needs at least one dataset")
        for kind in self.learners:
            if kind not in LEARNER_KINDS:
                raise ValueError(f"unknown learner {kind!r}")
        for pf in self.prefilters:
            if pf not in PREFILTERS:
                raise ValueError(f"unknown prefilter {pf!r}")
        if not self.prefilters:
            raise ValueError("plan needs at least one prefilter")
        if not self.measures:
            raise ValueError("plan needs at least one measure")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.bins < 2:
            raise ValueError("bins must be at least 2")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "cross" and self.control is None:
            raise ValueError("cross-measure mode needs a control measure")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ValueError("dataset names must be unique")


@dataclass(frozen=True)
class CellResult:
    dataset: str
    learner: str
    prefilter: str
    measure: MeasureKind
    repeat: int
    bin: int
    value: float | None
    baseline: float | None
    delta: float | None
    seconds: float
    goal: MeasureKind | None = None
    reason: str | None = None


@dataclass(frozen=True)
class TuneRecord:
    dataset: str
    learner: str
    repeat: int
    bin: int
    goal: MeasureKind
    k: int
    m: int
    r: float


@dataclass(frozen=True)
class SummaryRow:
    dataset: str
    learner: str
    prefilter: str
    measure: MeasureKind
    count: int
    median: float | None
    iqr: float | None
    missing: int


@dataclass(frozen=True)
class DatasetRanking:
    dataset: str
    measure: MeasureKind
    groups: RankedGroups
    star: str


@dataclass(frozen=True)
class RuntimeRow:
    dataset: str
    prefilter: str
    mean_seconds: float


def _evaluate(
    kind: str,
    seed: int,
    train_ds: Dataset,
    test_ds: Dataset,
    measures: Sequence[MeasureKind],
) -> dict[MeasureKind, tuple[float | None, str | None]]:
    model = learners.train(LearnerSpec(kind, seed=seed), train_ds)
    scores = learners.score_all(model, test_ds.rows)
    predicted = scores >= model.threshold
    out: dict[MeasureKind, tuple[float | None, str | None]] = {}
    for measure in measures:
        try:
            out[measure] = (metrics.measure_value(measure, scores, predicted, test_ds.labels), None)
        except UndefinedMetricError as err:
            out[measure] = (None, str(err))
    return out


def _missing_cells(
    plan: ExperimentPlan, d: Dataset, kind: str, repeat: int, bin_idx: int, reason: str
) -> list[CellResult]:
    cells = []
    for pf in plan.prefilters:
        goals = _tuning_goals(plan) if pf == "smote_tuned" else (None,)
        for goal in goals:
            for measure in _cell_measures(plan, pf, goal):
                cells.append(CellResult(
                    dataset=d.name, learner=kind, prefilter=pf, measure=measure,
                    repeat=repeat, bin=bin_idx, value=None, baseline=None,
                    delta=None, seconds=0.0, goal=goal, reason=reason,
                ))
    return cells


def _tuning_goals(plan: ExperimentPlan) -> tuple[MeasureKind, ...]:
    if plan.mode == "cross":
        return (plan.control,)
    return plan.measures


def _cell_measures(
    plan: ExperimentPlan, prefilter: str, goal: MeasureKind | None
) -> tuple[MeasureKind, ...]:
    # within-measure tuning yields one cell per goal; cross-measure tuning
    # yields every measure from the single control-tuned model
    if prefilter == "smote_tuned" and plan.mode == "within":
        return (goal,)
    return plan.measures


def _tuned_params(
    plan: ExperimentPlan,
    d: Dataset,
    train_ds: Dataset,
    train_bin_indices: Sequence[np.ndarray],
    kind: str,
    goal: MeasureKind,
    cell_seed: int,
) -> SmoteParams:
    """Tune on the training bins (last bin = DE validation); on a degenerate
    fold, re-split once with a derived seed before giving up."""
    folds = [subset(d, idx) for idx in train_bin_indices]
    spec = LearnerSpec(kind, seed=derive_seed(cell_seed, "learner"))
    try:
        return smotuned(folds, spec, goal, plan.de, seed=derive_seed(cell_seed, "tune"))
    except DegenerateFoldError:
        fresh = shuffle_and_bin(train_ds, len(folds), derive_seed(cell_seed, "resplit"))
        folds = [subset(train_ds, fresh.indices_of(b)) for b in range(len(folds))]
        return smotuned(folds, spec, goal, plan.de, seed=derive_seed(cell_seed, "retry"))


def _bin_job(args: tuple[ExperimentPlan, int, int, int]) -> tuple[list[CellResult], list[TuneRecord]]:
    plan, dataset_idx, repeat, bin_idx = args
    d = plan.datasets[dataset_idx]
    partition = shuffle_and_bin(d, plan.bins, derive_seed(plan.seed, "partition", d.name, repeat))
    train_bin_indices = [partition.indices_of(b) for b in range(plan.bins) if b != bin_idx]
    train_idx = np.concatenate(train_bin_indices)
    train_ds = subset(d, train_idx)
    test_ds = subset(d, partition.indices_of(bin_idx))

    cells: list[CellResult] = []
    tunings: list[TuneRecord] = []
    train_single_class = np.unique(train_ds.labels).size < 2

    for kind in plan.learners:
        if train_single_class:
            cells.extend(_missing_cells(
                plan, d, kind, repeat, bin_idx, "training bins contain a single class"))
            continue

        started = time.perf_counter()
        base_seed = derive_seed(plan.seed, "cell", d.name, repeat, bin_idx, "none", kind)
        baseline = _evaluate(kind, base_seed, train_ds, test_ds, plan.measures)
        base_seconds = time.perf_counter() - started

        for pf in plan.prefilters:
            if pf == "none":
                for measure in plan.measures:
                    value, reason = baseline[measure]
                    cells.append(CellResult(
                        dataset=d.name, learner=kind, prefilter=pf, measure=measure,
                        repeat=repeat, bin=bin_idx, value=value, baseline=value,
                        delta=0.0 if value is not None else None,
                        seconds=base_seconds, reason=reason,
                    ))
            elif pf in ("smote", "mahakil"):
                cell_seed = derive_seed(plan.seed, "cell", d.name, repeat, bin_idx, pf, kind)
                started = time.perf_counter()
                try:
                    if pf == "smote":
                        resampled = smote(train_ds, SmoteParams(),
                                          seed=derive_seed(cell_seed, "resample"))
                    else:
                        majority = int(np.max(np.bincount(train_ds.labels.astype(int))))
                        resampled = mahakil(train_ds, majority,
                                            seed=derive_seed(cell_seed, "resample"))
                    values = _evaluate(kind, derive_seed(cell_seed, "learner"),
                                       resampled, test_ds, plan.measures)
                except ValueError as err:
                    cells.extend(
                        CellResult(
                            dataset=d.name, learner=kind, prefilter=pf, measure=measure,
                            repeat=repeat, bin=bin_idx, value=None,
                            baseline=baseline[measure][0], delta=None,
                            seconds=time.perf_counter() - started, reason=str(err),
                        )
                        for measure in plan.measures
                    )
                    continue
                seconds = time.perf_counter() - started
                for measure in plan.measures:
                    value, reason = values[measure]
                    base = baseline[measure][0]
                    cells.append(CellResult(
                        dataset=d.name, learner=kind, prefilter=pf, measure=measure,
                        repeat=repeat, bin=bin_idx, value=value, baseline=base,
                        delta=value - base if value is not None and base is not None else None,
                        seconds=seconds, reason=reason,
                    ))
            else:  # smote_tuned
                for goal in _tuning_goals(plan):
                    cell_seed = derive_seed(
                        plan.seed, "cell", d.name, repeat, bin_idx, pf, kind, goal.value)
                    started = time.perf_counter()
                    try:
                        params = _tuned_params(
                            plan, d, train_ds, train_bin_indices, kind, goal, cell_seed)
                        resampled = smote(train_ds, params,
                                          seed=derive_seed(cell_seed, "apply"))
                        values = _evaluate(kind, derive_seed(cell_seed, "learner"),
                                           resampled, test_ds, plan.measures)
                    except (DegenerateFoldError, ValueError) as err:
                        cells.extend(
                            CellResult(
                                dataset=d.name, learner=kind, prefilter=pf, measure=measure,
                                repeat=repeat, bin=bin_idx, value=None,
                                baseline=baseline[measure][0], delta=None,
                                seconds=time.perf_counter() - started, goal=goal,
                                reason=str(err),
                            )
                            for measure in _cell_measures(plan, pf, goal)
                        )
                        continue
                    seconds = time.perf_counter() - started
                    tunings.append(TuneRecord(
                        dataset=d.name, learner=kind, repeat=repeat, bin=bin_idx,
                        goal=goal, k=params.k, m=params.m, r=params.r,
                    ))
                    for measure in _cell_measures(plan, pf, goal):
                        value, reason = values[measure]
                        base = baseline[measure][0]
                        cells.append(CellResult(
                            dataset=d.name, learner=kind, prefilter=pf, measure=measure,
                            repeat=repeat, bin=bin_idx, value=value, baseline=base,
                            delta=value - base if value is not None and base is not None else None,
                            seconds=seconds, goal=goal, reason=reason,
                        ))
    return cells, tunings


def run(
    plan: ExperimentPlan,
    jobs: int = 1,
    collect_tuning: list[TuneRecord] | None = None,
) -> list[CellResult]:
    """Execute the plan; cells come back in a canonical deterministic order.

    Cells are independent jobs, so any `jobs` degree gives bit-identical
    results (the wall-clock seconds column is the only nondeterministic
    field). Tuned (k, m, r) choices are appended to `collect_tuning` when a
    list is supplied.
    """
    args = [
        (plan, di, repeat, bin_idx)
        for di in range(len(plan.datasets))
        for repeat in range(plan.repeats)
        for bin_idx in range(plan.bins)
    ]
    if jobs <= 1:
        outputs = [_bin_job(a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_bin_job, args))
    cells: list[CellResult] = []
    for job_cells, job_tunings in outputs:
        cells.extend(job_cells)
        if collect_tuning is not None:
            collect_tuning.extend(job_tunings)
    return cells


def percentile_nearest_rank(sorted_values: Sequence[float], q: float) -> float:
    """Nearest-rank percentile: the ceil(q*n)-th smallest value (1-based)."""
    n = len(sorted_values)
    if n == 0:
        raise ValueError("empty input")
    rank = max(1, int(np.ceil(q * n)))
    return float(sorted_values[min(rank, n) - 1])


def summarize(results: Sequence[CellResult]) -> list[SummaryRow]:
    """Median and IQR per (dataset, learner, prefilter, measure).

    Missing cells are excluded from the statistics but counted; a key with no
    defined cells gets count 0 and no median."""
    if not results:
        raise ValueError("no results to summarize")
    keys: list[tuple[str, str, str, MeasureKind]] = []
    buckets: dict[tuple, list[float]] = {}
    missing: dict[tuple, int] = {}
    for cell in results:
        key = (cell.dataset, cell.learner, cell.prefilter, cell.measure)
        if key not in buckets:
            keys.append(key)
            buckets[key] = []
            missing[key] = 0
        if cell.value is None:
            missing[key] += 1
        else:
            buckets[key].append(cell.value)
    rows = []
    for key in keys:
        values = sorted(buckets[key])
        if values:
            median = percentile_nearest_rank(values, 0.5)
            iqr = percentile_nearest_rank(values, 0.75) - percentile_nearest_rank(values, 0.25)
        else:
            median = iqr = None
        rows.append(SummaryRow(
            dataset=key[0], learner=key[1], prefilter=key[2], measure=key[3],
            count=len(values), median=median, iqr=iqr, missing=missing[key],
        ))
    return rows


def rank(
    results: Sequence[CellResult], measure: MeasureKind, seed: int = 0
) -> list[DatasetRanking]:
    """Scott-Knott ranking of (learner, prefilter) treatments per dataset.

    The star is the rank-1 member with the best median (lexicographically
    first label on ties). Treatments with no defined cells are dropped."""
    per_dataset: dict[str, dict[str, list[float]]] = {}
    for cell in results:
        if cell.measure is not measure or cell.value is None:
            continue
        label = f"{cell.learner}+{cell.prefilter}"
        per_dataset.setdefault(cell.dataset, {}).setdefault(label, []).append(cell.value)
    rankings = []
    for dataset, treatments in per_dataset.items():
        samples = [TreatmentSamples(label, tuple(vals)) for label, vals in sorted(treatments.items())]
        groups = scott_knott(
            samples,
            seed=derive_seed(seed, "rank", dataset, measure.value),
            larger_is_better=measure.larger_is_better,
        )
        top = groups.groups[0]
        if measure.larger_is_better:
            best = max(t.median for t in top)
        else:
            best = min(t.median for t in top)
        star = min(t.label for t in top if t.median == best)
        rankings.append(DatasetRanking(dataset=dataset, measure=measure, groups=groups, star=star))
    return rankings


def runtime_report(results: Sequence[CellResult]) -> list[RuntimeRow]:
    """Mean wall-clock seconds per (dataset, prefilter)."""
    keys: list[tuple[str, str]] = []
    buckets: dict[tuple[str, str], list[float]] = {}
    for cell in results:
        key = (cell.dataset, cell.prefilter)
        if key not in buckets:
            keys.append(key)
            buckets[key] = []
        buckets[key].append(cell.seconds)
    return [
        RuntimeRow(dataset=k[0], prefilter=k[1], mean_seconds=float(np.mean(buckets[k])))
        for k in keys
    ]
