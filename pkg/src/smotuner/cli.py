"""Command-line front end.

Subcommands: run (full experiment), resample (standalone SMOTE/MAHAKIL),
tune (standalone parameter search), rank (re-rank an existing results CSV),
and config-dump. Options may come from a flat key=value config file, with
command-line flags overriding file values.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import reports, rig
from .data import (DEFAULT_EXCLUDED_COLUMNS, DatasetError, class_counts,
                   load_csv, save_csv)
from .learners import LEARNER_KINDS, LearnerSpec
from .metrics import MeasureKind
from .resample import SmoteParams, mahakil, smote
from .rig import PREFILTERS, ExperimentPlan
from .seeding import derive_seed
from .tune import DeConfig, decode, smotuned_candidate


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    data: str = "data"
    out: str = "out"
    label: str = "bug"
    exclude: tuple[str, ...] = DEFAULT_EXCLUDED_COLUMNS
    learners: tuple[str, ...] = LEARNER_KINDS
    prefilters: tuple[str, ...] = ("none", "smote", "smote_tuned")
    measures: tuple[str, ...] = ("recall", "precision", "false_alarm", "auc")
    mode: str = "within"
    control: str = "auc"
    repeats: int = 5
    bins: int = 5
    seed: int = 1
    jobs: int = 1
    format: str = "markdown"

    _LIST_KEYS = ("exclude", "learners", "prefilters", "measures")
    _INT_KEYS = ("repeats", "bins", "seed", "jobs")

    def dump(self) -> str:
        lines = []
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if field.name in self._LIST_KEYS:
                value = ",".join(value)
            lines.append(f"{field.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    def apply(self, key: str, raw: str) -> None:
        if key not in self.field_names():
            raise UsageError(f"unknown config key {key!r}")
        if key in self._LIST_KEYS:
            value = tuple(part.strip() for part in raw.split(",") if part.strip())
        elif key in self._INT_KEYS:
            try:
                value = int(raw)
            except ValueError:
                raise UsageError(f"config key {key!r} needs an integer, got {raw!r}") from None
        else:
            value = raw.strip()
        setattr(self, key, value)


def load_config_file(config: RunConfig, path: str | Path) -> None:
    path = Path(path)
    if not path.exists():
        raise UsageError(f"no such config file: {path}")
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise UsageError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
        key, _, raw = text.partition("=")
        config.apply(key.strip(), raw.strip())


def build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig()
    if getattr(args, "config", None):
        load_config_file(config, args.config)
    for key in RunConfig.field_names():
        flag = getattr(args, key, None)
        if flag is not None:
            config.apply(key, flag)
    return config


def _measure(name: str) -> MeasureKind:
    try:
        return MeasureKind(name)
    except ValueError:
        raise UsageError(
            f"unknown measure {name!r} (choose from "
            f"{', '.join(m.value for m in MeasureKind)})") from None


def _plan_from_config(config: RunConfig) -> ExperimentPlan:
    data_dir = Path(config.data)
    if not data_dir.is_dir():
        raise DatasetError(f"data directory not found: {data_dir}")
    files = sorted(data_dir.glob("*.csv"))
    if not files:
        raise DatasetError(f"no CSV datasets in {data_dir}")
    datasets = tuple(load_csv(f, config.label, config.exclude) for f in files)
    for kind in config.learners:
        if kind not in LEARNER_KINDS:
            raise UsageError(f"unknown learner {kind!r}")
    for pf in config.prefilters:
        if pf not in PREFILTERS:
            raise UsageError(f"unknown prefilter {pf!r}")
    if config.mode not in ("within", "cross"):
        raise UsageError(f"mode must be 'within' or 'cross', got {config.mode!r}")
    if config.format not in reports.FORMATS:
        raise UsageError(f"format must be one of {', '.join(reports.FORMATS)}")
    return ExperimentPlan(
        datasets=datasets,
        learners=tuple(config.learners),
        prefilters=tuple(config.prefilters),
        measures=tuple(_measure(m) for m in config.measures),
        repeats=config.repeats,
        bins=config.bins,
        mode=config.mode,
        control=_measure(config.control) if config.mode == "cross" else None,
        seed=config.seed,
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = build_config(args)
    plan = _plan_from_config(config)
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    tunings: list[rig.TuneRecord] = []
    cells = rig.run(plan, jobs=config.jobs, collect_tuning=tunings)
    reports.write_results_csv(out_dir / "results.csv", cells)
    if tunings:
        reports.write_tuning_csv(out_dir / "params.csv", tunings)

    ext = reports.report_extension(config.format)
    summary = rig.summarize(cells)
    (out_dir / f"summary.{ext}").write_text(
        reports.render_summary(summary, config.format), encoding="utf-8")
    rankings = [
        ranking
        for measure in plan.measures
        for ranking in rig.rank(cells, measure, seed=plan.seed)
    ]
    (out_dir / f"ranks.{ext}").write_text(
        reports.render_ranks(rankings, config.format), encoding="utf-8")
    reports.write_runtimes_csv(out_dir / "runtimes.csv", rig.runtime_report(cells))
    print(f"wrote {len(cells)} cells to {out_dir}")
    return 0


def cmd_resample(args: argparse.Namespace) -> int:
    d = load_csv(args.input, args.label)
    before = class_counts(d)
    if args.method == "smote":
        params = SmoteParams(k=args.k, m=args.m, r=args.r)
        out = smote(d, params, seed=args.seed)
    else:
        if args.target is None:
            counts = np.bincount(d.labels.astype(int), minlength=2)
            target = int(counts.max())
        else:
            target = args.target
        out = mahakil(d, target, seed=args.seed)
    after = class_counts(out)
    save_csv(out, args.output, label_column=args.label)
    print(f"({before[0]},{before[1]}) -> ({after[0]},{after[1]})")
    return 0


def cmd_tune(args: argparse.Namespace) -> int:
    from .data import shuffle_and_bin, subset

    d = load_csv(args.input, args.label)
    if np.unique(d.labels).size < 2:
        raise DatasetError(f"{args.input}: both classes must be present")
    partition = shuffle_and_bin(d, 4, derive_seed(args.seed, "tune-bins"))
    folds = [subset(d, partition.indices_of(b)) for b in range(4)]
    goal = _measure(args.measure)
    spec = LearnerSpec(args.learner, seed=derive_seed(args.seed, "learner"))
    best = smotuned_candidate(folds, spec, goal, DeConfig(), seed=args.seed)
    params = decode(best)
    score = best.fitness if goal.larger_is_better else -best.fitness
    payload = {
        "k": params.k, "m": params.m, "r": params.r,
        "goal": goal.value, "validation_score": score,
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"tuned k={params.k} m={params.m} r={params.r:.3f} "
              f"({goal.value} on validation: {score:.4f})")
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    cells = reports.read_results_csv(args.results)
    measure = _measure(args.measure)
    rankings = rig.rank(cells, measure, seed=args.seed)
    text = reports.render_ranks(rankings, args.format)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        ext = reports.report_extension(args.format)
        (out / f"ranks.{ext}").write_text(text, encoding="utf-8")
        print(f"wrote ranks to {out}")
    else:
        print(text, end="")
    return 0


def cmd_config_dump(args: argparse.Namespace) -> int:
    print(build_config(args).dump(), end="")
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _add_plan_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--data", help="directory of dataset CSVs")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--label", help="label column name")
    parser.add_argument("--exclude", help="comma-separated identifier columns to drop")
    parser.add_argument("--learners", help="comma-separated learner kinds")
    parser.add_argument("--prefilters", help="comma-separated prefilters")
    parser.add_argument("--measures", help="comma-separated measures")
    parser.add_argument("--mode", help="within or cross")
    parser.add_argument("--control", help="control measure for cross mode")
    parser.add_argument("--repeats", help="number of repeats")
    parser.add_argument("--bins", help="number of cross-validation bins")
    parser.add_argument("--seed", help="master seed")
    parser.add_argument("--jobs", help="parallel worker count")
    parser.add_argument("--format", help="report format: markdown, csv, or json")


def build_parser() -> _Parser:
    parser = _Parser(prog="smotuner", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a full experiment")
    _add_plan_flags(run_p)
    run_p.set_defaults(func=cmd_run)

    rs = sub.add_parser("resample", help="resample one CSV")
    rs.add_argument("--input", required=True)
    rs.add_argument("--output", required=True)
    rs.add_argument("--label", default="bug")
    rs.add_argument("--method", choices=("smote", "mahakil"), default="smote")
    rs.add_argument("--k", type=int, default=5)
    rs.add_argument("--m", type=int, default=50)
    rs.add_argument("--r", type=float, default=2.0)
    rs.add_argument("--target", type=int, default=None,
                    help="mahakil minority target (default: majority size)")
    rs.add_argument("--seed", type=int, default=0)
    rs.set_defaults(func=cmd_resample)

    tn = sub.add_parser("tune", help="tune SMOTE parameters for one CSV")
    tn.add_argument("--input", required=True)
    tn.add_argument("--label", default="bug")
    tn.add_argument("--learner", choices=LEARNER_KINDS, default="rf")
    tn.add_argument("--measure", default="auc")
    tn.add_argument("--seed", type=int, default=0)
    tn.add_argument("--json", action="store_true", help="print machine-readable JSON")
    tn.set_defaults(func=cmd_tune)

    rk = sub.add_parser("rank", help="re-rank an existing results CSV")
    rk.add_argument("--results", required=True)
    rk.add_argument("--measure", required=True)
    rk.add_argument("--out", default=None)
    rk.add_argument("--format", choices=reports.FORMATS, default="markdown")
    rk.add_argument("--seed", type=int, default=0)
    rk.set_defaults(func=cmd_rank)

    cd = sub.add_parser("config-dump", help="print the effective configuration")
    _add_plan_flags(cd)
    cd.set_defaults(func=cmd_config_dump)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 1
    except (DatasetError, FileNotFoundError) as err:
        print(f"data error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
