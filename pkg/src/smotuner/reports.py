"""Persistence and rendering of experiment outputs.

results.csv carries full float precision (repr round-trips exactly); rendered
tables show medians to two decimals. The rank tables follow the one-row-per-
learner layout with short prefilter column headers (No, S1, S2, S3) and a '*'
on the best treatment per dataset.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from .metrics import MeasureKind
from .rig import CellResult, DatasetRanking, RuntimeRow, SummaryRow, TuneRecord

RESULT_COLUMNS = (
    "dataset", "learner", "prefilter", "measure", "repeat", "bin",
    "value", "baseline", "delta", "seconds", "goal", "reason",
)

PREFILTER_HEADERS = {"none": "No", "smote": "S1", "smote_tuned": "S2", "mahakil": "S3"}

FORMATS = ("markdown", "csv", "json")

_EXTENSIONS = {"markdown": "md", "csv": "csv", "json": "json"}


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_results_csv(path: str | Path, cells: Sequence[CellResult]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RESULT_COLUMNS)
        for c in cells:
            writer.writerow([
                c.dataset, c.learner, c.prefilter, c.measure.value,
                c.repeat, c.bin,
                _fmt(c.value), _fmt(c.baseline), _fmt(c.delta), _fmt(c.seconds),
                c.goal.value if c.goal is not None else "",
                c.reason or "",
            ])


def read_results_csv(path: str | Path) -> list[CellResult]:
    cells = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        for row in reader:
            cells.append(CellResult(
                dataset=row["dataset"],
                learner=row["learner"],
                prefilter=row["prefilter"],
                measure=MeasureKind(row["measure"]),
                repeat=int(row["repeat"]),
                bin=int(row["bin"]),
                value=float(row["value"]) if row["value"] else None,
                baseline=float(row["baseline"]) if row["baseline"] else None,
                delta=float(row["delta"]) if row["delta"] else None,
                seconds=float(row["seconds"]) if row["seconds"] else 0.0,
                goal=MeasureKind(row["goal"]) if row["goal"] else None,
                reason=row["reason"] or None,
            ))
    return cells


def write_tuning_csv(path: str | Path, records: Sequence[TuneRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["dataset", "learner", "repeat", "bin", "goal", "k", "m", "r"])
        for t in records:
            writer.writerow([t.dataset, t.learner, t.repeat, t.bin,
                             t.goal.value, t.k, t.m, repr(t.r)])


def write_runtimes_csv(path: str | Path, rows: Sequence[RuntimeRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["dataset", "prefilter", "mean_seconds"])
        for r in rows:
            writer.writerow([r.dataset, r.prefilter, repr(r.mean_seconds)])


def render_summary(rows: Sequence[SummaryRow], fmt: str = "markdown") -> str:
    if fmt == "json":
        return json.dumps([
            {
                "dataset": r.dataset, "learner": r.learner, "prefilter": r.prefilter,
                "measure": r.measure.value, "count": r.count,
                "median": r.median, "iqr": r.iqr, "missing": r.missing,
            }
            for r in rows
        ], indent=2) + "\n"
    if fmt == "csv":
        lines = ["dataset,learner,prefilter,measure,count,median,iqr,missing"]
        for r in rows:
            lines.append(",".join([
                r.dataset, r.learner, r.prefilter, r.measure.value, str(r.count),
                _fmt(r.median), _fmt(r.iqr), str(r.missing),
            ]))
        return "\n".join(lines) + "\n"
    present = [r for r in rows if r.count > 0]
    absent = [r for r in rows if r.count == 0]
    lines = ["# Summary", "",
             "| dataset | learner | prefilter | measure | n | median | IQR | missing |",
             "|---|---|---|---|---|---|---|---|"]
    for r in present:
        lines.append(
            f"| {r.dataset} | {r.learner} | {r.prefilter} | {r.measure.value} "
            f"| {r.count} | {r.median:.2f} | {r.iqr:.2f} | {r.missing} |"
        )
    if absent:
        lines += ["", "## Missing (no defined cells)", ""]
        for r in absent:
            lines.append(f"- {r.dataset} / {r.learner} / {r.prefilter} / "
                         f"{r.measure.value}: {r.missing} cells missing")
    return "\n".join(lines) + "\n"


def _rank_table(ranking: DatasetRanking) -> tuple[list[str], list[str], dict]:
    medians = {t.label: t.median for group in ranking.groups.groups for t in group}
    ranks = {t.label: i + 1
             for i, group in enumerate(ranking.groups.groups) for t in group}
    learners = sorted({label.split("+", 1)[0] for label in medians})
    prefilters = [pf for pf in PREFILTER_HEADERS if any(
        label.split("+", 1)[1] == pf for label in medians)]
    return learners, prefilters, {"medians": medians, "ranks": ranks}


def render_ranks(rankings: Sequence[DatasetRanking], fmt: str = "markdown") -> str:
    if fmt == "json":
        return json.dumps([
            {
                "dataset": rk.dataset, "measure": rk.measure.value, "star": rk.star,
                "groups": rk.groups.labels(),
            }
            for rk in rankings
        ], indent=2) + "\n"
    if fmt == "csv":
        lines = ["dataset,measure,learner,prefilter,rank,median,star"]
        for rk in rankings:
            for i, group in enumerate(rk.groups.groups):
                for t in sorted(group, key=lambda t: t.label):
                    learner, prefilter = t.label.split("+", 1)
                    lines.append(",".join([
                        rk.dataset, rk.measure.value, learner, prefilter,
                        str(i + 1), repr(t.median),
                        "*" if t.label == rk.star else "",
                    ]))
        return "\n".join(lines) + "\n"
    lines = ["# Scott-Knott ranks", ""]
    for rk in rankings:
        learners, prefilters, table = _rank_table(rk)
        lines.append(f"## {rk.dataset} - {rk.measure.value}")
        lines.append("")
        headers = [PREFILTER_HEADERS[pf] for pf in prefilters]
        lines.append("| learner | " + " | ".join(headers) + " |")
        lines.append("|---|" + "---|" * len(prefilters))
        for learner in learners:
            row = [learner]
            for pf in prefilters:
                label = f"{learner}+{pf}"
                if label in table["medians"]:
                    star = "*" if label == rk.star else ""
                    row.append(f"{table['ranks'][label]} "
                               f"{table['medians'][label]:.2f}{star}")
                else:
                    row.append("")
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    return "\n".join(lines)


def report_extension(fmt: str) -> str:
    return _EXTENSIONS[fmt]
