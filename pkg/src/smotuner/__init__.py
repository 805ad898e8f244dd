"""Tunable SMOTE resampling, a differential-evolution parameter tuner, and a
ranking-study harness for imbalanced binary tabular data."""

from .data import BinPartition, Dataset, class_counts, load_csv, make_synthetic, shuffle_and_bin
from .metrics import (ALL_MEASURES, ConfusionMatrix, MeasureKind, UndefinedMetricError,
                      auc, confusion, false_alarm, precision, recall)
from .learners import LEARNER_KINDS, LearnerSpec, Model, predict, score, train
from .resample import SmoteParams, mahakil, minkowski_distance, nearest_same_class, smote, synthesize
from .tune import Candidate, DeConfig, DegenerateFoldError, de_optimize, decode, smotuned
from .stats import RankedGroups, TreatmentSamples, a12, bootstrap_significant, scott_knott
from .rig import CellResult, ExperimentPlan, rank, run, runtime_report, summarize

__all__ = [
    "ALL_MEASURES", "BinPartition", "Candidate", "CellResult", "ConfusionMatrix",
    "Dataset", "DeConfig", "DegenerateFoldError", "ExperimentPlan", "LEARNER_KINDS",
    "LearnerSpec", "MeasureKind", "Model", "RankedGroups", "SmoteParams",
    "TreatmentSamples", "UndefinedMetricError", "a12", "auc", "bootstrap_significant",
    "class_counts", "confusion", "de_optimize", "decode", "false_alarm", "load_csv",
    "mahakil", "make_synthetic", "minkowski_distance", "nearest_same_class", "precision",
    "predict", "rank", "recall", "run", "runtime_report", "score", "scott_knott",
    "shuffle_and_bin", "smote", "smotuned", "summarize", "synthesize", "train",
]
