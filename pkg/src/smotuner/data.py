"""Dataset ingestion, shuffling/binning, and synthetic fixtures.

A Dataset is an immutable bundle of a float feature matrix and a boolean
label vector (true = the class of interest, conventionally the minority).
Labels are binarized at load time: a label cell counts as true iff it is a
number greater than zero or the literal ``true``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_EXCLUDED_COLUMNS = ("name", "version")


class DatasetError(ValueError):
    """A CSV file could not be turned into a valid dataset."""


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    feature_names: tuple[str, ...]
    rows: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        rows = np.array(self.rows, dtype=float)
        labels = np.array(self.labels, dtype=bool)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d matrix")
        if rows.shape[1] != len(self.feature_names):
            raise ValueError(
                f"rows have {rows.shape[1]} columns but "
                f"{len(self.feature_names)} feature names were given"
            )
        if labels.shape != (rows.shape[0],):
            raise ValueError("labels must have one entry per row")
        if rows.size and not np.isfinite(rows).all():
            raise ValueError("feature values must be finite")
        rows.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.rows.shape[0]


@dataclass(frozen=True, eq=False)
class BinPartition:
    """Assignment of every instance to one of ``bins`` near-equal bins."""

    bin_assignment: np.ndarray
    bins: int
    seed: int

    def __post_init__(self) -> None:
        assignment = np.array(self.bin_assignment, dtype=int)
        assignment.flags.writeable = False
        object.__setattr__(self, "bin_assignment", assignment)

    def indices_of(self, b: int) -> np.ndarray:
        return np.flatnonzero(self.bin_assignment == b)


def _parse_label(cell: str, where: str) -> bool:
    text = cell.strip().lower()
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return float(text) > 0
    except ValueError:
        raise DatasetError(f"{where}: cannot parse {cell!r} as a label") from None


def load_csv(
    path: str | Path,
    label_column: str,
    exclude_columns: Sequence[str] = DEFAULT_EXCLUDED_COLUMNS,
) -> Dataset:
    """Load a header-first CSV, binarizing the label column (>0 or "true").

    Columns listed in ``exclude_columns`` (identifier columns such as "name"
    and "version") are dropped; the remaining columns become features in file
    order. Parse problems are reported with the file line and column name.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DatasetError(f"{path}: empty file, expected a header row")
        header = [name.strip() for name in header]
        if label_column not in header:
            raise DatasetError(
                f"{path}: no column named {label_column!r} "
                f"(columns: {', '.join(header)})"
            )
        label_at = header.index(label_column)
        excluded = set(exclude_columns)
        feature_at = [
            i for i, name in enumerate(header)
            if i != label_at and name not in excluded
        ]
        rows: list[list[float]] = []
        labels: list[bool] = []
        for line_no, record in enumerate(reader, start=2):
            if not any(cell.strip() for cell in record):
                continue
            if len(record) != len(header):
                raise DatasetError(
                    f"{path}:{line_no}: expected {len(header)} cells, "
                    f"got {len(record)}"
                )
            values = []
            for i in feature_at:
                where = f"{path}:{line_no}: column {header[i]!r}"
                try:
                    value = float(record[i])
                except ValueError:
                    raise DatasetError(
                        f"{where}: cannot parse {record[i]!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise DatasetError(f"{where}: non-finite value {record[i]!r}")
                values.append(value)
            where = f"{path}:{line_no}: column {label_column!r}"
            labels.append(_parse_label(record[label_at], where))
            rows.append(values)
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    return Dataset(
        name=path.stem,
        feature_names=tuple(header[i] for i in feature_at),
        rows=np.array(rows, dtype=float),
        labels=np.array(labels, dtype=bool),
    )


def save_csv(d: Dataset, path: str | Path, label_column: str = "bug") -> None:
    """Write a dataset as CSV (full float precision; labels as true/false)."""
    if label_column in d.feature_names:
        raise ValueError(f"label column {label_column!r} collides with a feature")
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(d.feature_names) + [label_column])
        for row, label in zip(d.rows, d.labels):
            writer.writerow([repr(float(v)) for v in row] + ["true" if label else "false"])


def subset(d: Dataset, indices: Iterable[int], name: str | None = None) -> Dataset:
    idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=int)
    return Dataset(
        name=name if name is not None else d.name,
        feature_names=d.feature_names,
        rows=d.rows[idx],
        labels=d.labels[idx],
    )


def concat(datasets: Sequence[Dataset], name: str | None = None) -> Dataset:
    if not datasets:
        raise ValueError("need at least one dataset")
    names = {d.feature_names for d in datasets}
    if len(names) != 1:
        raise ValueError("datasets have mismatched feature names")
    return Dataset(
        name=name if name is not None else datasets[0].name,
        feature_names=datasets[0].feature_names,
        rows=np.vstack([d.rows for d in datasets]),
        labels=np.concatenate([d.labels for d in datasets]),
    )


def shuffle_and_bin(d: Dataset, bins: int, seed: int) -> BinPartition:
    """Randomize instance order and split into near-equal bins.

    Plain (unstratified) randomization: bin membership is independent of the
    labels. Deterministic for a fixed (dataset size, bins, seed).
    """
    n = len(d)
    if bins < 2:
        raise ValueError("bins must be at least 2")
    if n < bins:
        raise ValueError(f"cannot split {n} rows into {bins} bins")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    assignment = np.empty(n, dtype=int)
    start = 0
    for b in range(bins):
        size = n // bins + (1 if b < n % bins else 0)
        assignment[order[start:start + size]] = b
        start += size
    return BinPartition(bin_assignment=assignment, bins=bins, seed=seed)


def class_counts(d: Dataset) -> tuple[int, int]:
    """Return (minority_count, majority_count); ties report true as minority."""
    if len(d) == 0:
        raise ValueError("empty dataset")
    true_count = int(d.labels.sum())
    false_count = len(d) - true_count
    if true_count <= false_count:
        return true_count, false_count
    return false_count, true_count


def minority_label(d: Dataset) -> bool:
    """The under-represented label value; ties resolve to true."""
    true_count = int(d.labels.sum())
    return true_count <= len(d) - true_count


def make_synthetic(
    n: int,
    features: int,
    minority_fraction: float,
    separation: float,
    seed: int,
    name: str | None = None,
) -> Dataset:
    """Two unit-variance Gaussian clusters, centroids `separation` apart per feature.

    round(n * minority_fraction) instances are labeled true and centered at
    ``separation`` on every feature; the rest are labeled false at the origin.
    """
    if n < 10:
        raise ValueError("n must be at least 10")
    if features < 2:
        raise ValueError("features must be at least 2")
    if not 0 < minority_fraction <= 0.5:
        raise ValueError("minority_fraction must be in (0, 0.5]")
    if separation < 0:
        raise ValueError("separation must be nonnegative")
    n_minority = int(round(n * minority_fraction))
    rng = np.random.default_rng(seed)
    majority = rng.normal(0.0, 1.0, size=(n - n_minority, features))
    minority = rng.normal(separation, 1.0, size=(n_minority, features))
    rows = np.vstack([majority, minority])
    labels = np.concatenate([
        np.zeros(n - n_minority, dtype=bool),
        np.ones(n_minority, dtype=bool),
    ])
    if name is None:
        name = f"synthetic-n{n}-f{features}-p{minority_fraction:g}-s{separation:g}-{seed}"
    return Dataset(
        name=name,
        feature_names=tuple(f"f{i}" for i in range(features)),
        rows=rows,
        labels=labels,
    )
