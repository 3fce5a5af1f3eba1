"""Experiment protocol: metrics, repeated k-fold cross-validation, ablations."""
from __future__ import annotations

import csv
import random
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from genlink.data import Dataset, ReferenceLinkSet, merge, split_folds
from genlink.learner import FitnessEvaluator, LearnerConfig, f1_score, initial_population, learn
from genlink.modes import MODES
from genlink.rules import LinkageRule, serialize


@dataclass(frozen=True)
class EvalResult:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp, fp, tn, fn) -> "EvalResult":
        return cls(tp, fp, tn, fn, *f1_score(tp, fp, fn))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("precision", "recall", "f1", "tp", "fp", "tn", "fn")}


class LinkEvaluator:
    """Confusion counts of rules on one fixed link set."""

    def __init__(self, links: ReferenceLinkSet, dataset: Dataset):
        self.fitness = FitnessEvaluator([dataset.pair(l) for l in links.positive],
                                        [dataset.pair(l) for l in links.negative])

    def __call__(self, rule: LinkageRule) -> EvalResult:
        tp, tn, fp, fn = self.fitness.confusion(rule)
        return EvalResult.from_counts(tp, fp, tn, fn)


def evaluate(rule: LinkageRule, links: ReferenceLinkSet, dataset: Dataset) -> EvalResult:
    return LinkEvaluator(links, dataset)(rule)


# ---------------------------------------------------------------------------
# Cross-validation

@dataclass
class CellResult:
    run: int
    fold: int
    seed: int
    train_f1: list  # per iteration, carried forward after an early stop
    val_f1: list
    seconds: list
    rule: LinkageRule
    iterations_run: int


@dataclass
class RunSummary:
    rows: list  # dicts keyed by SUMMARY_COLUMNS
    cells: list = field(default_factory=list)
    runs: int = 0

    def at(self, iteration: int) -> dict:
        return self.rows[min(iteration, len(self.rows) - 1)]


SUMMARY_COLUMNS = ("iteration", "mean_train_f1", "sd_train_f1", "mean_val_f1", "sd_val_f1",
                   "mean_seconds", "sd_seconds")


def _pad(values, n):
    return list(values) + [values[-1]] * (n - len(values))


def _run_cell(dataset, config, train, val, run, fold, seed, timing):
    cfg = config.replace(rng_seed=seed)
    result = learn(dataset, train.positive, train.negative, cfg)
    val_eval = LinkEvaluator(val, dataset)
    n = config.max_iterations + 1
    hist = result.history
    return CellResult(
        run, fold, seed,
        _pad([h.best.train_f1 for h in hist], n),
        _pad([val_eval(h.best_rule).f1 for h in hist], n),
        _pad([h.seconds if timing else 0.0 for h in hist], n),
        result.rule,
        len(hist) - 1,
    )


def _tasks(dataset, runs, folds, master_seed):
    rng = random.Random(master_seed)
    tasks = []
    for run in range(runs):
        parts = split_folds(dataset.links, folds, random.Random(rng.getrandbits(63)))
        for fold in range(folds):
            # validate on one fold, train on the rest (k=2: train/validate swap)
            val = parts[fold]
            train = merge(parts[:fold] + parts[fold + 1:])
            tasks.append((train, val, run, fold, rng.getrandbits(63)))
    return tasks


def _sd(xs):
    return statistics.pstdev(xs) if len(xs) > 1 else 0.0


def summarize(cells, n_rows: int, runs: int) -> RunSummary:
    rows = []
    for i in range(n_rows):
        tr = [c.train_f1[i] for c in cells]
        va = [c.val_f1[i] for c in cells]
        sec = [c.seconds[i] for c in cells]
        rows.append({
            "iteration": i,
            "mean_train_f1": statistics.fmean(tr), "sd_train_f1": _sd(tr),
            "mean_val_f1": statistics.fmean(va), "sd_val_f1": _sd(va),
            "mean_seconds": statistics.fmean(sec), "sd_seconds": _sd(sec),
        })
    return RunSummary(rows, list(cells), runs)


def cross_validate(dataset: Dataset, config: LearnerConfig, runs: int = 10, folds: int = 2,
                   master_seed: Optional[int] = None, workers: int = 1,
                   timing: bool = True) -> RunSummary:
    """Repeat a stratified ``folds``-fold split ``runs`` times; every fold is
    validated once by a rule learned on the remaining folds.

    Every cell gets a seed derived from ``master_seed`` (default: the
    config's seed) in a fixed order, so results do not depend on ``workers``.
    With ``timing=False`` the seconds columns are zero and output is
    byte-reproducible.
    """
    seed = config.rng_seed if master_seed is None else master_seed
    tasks = _tasks(dataset, runs, folds, seed)
    args = [(dataset, config, tr, va, run, fold, s, timing) for tr, va, run, fold, s in tasks]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, *zip(*args)))
    else:
        cells = [_run_cell(*a) for a in args]
    return summarize(cells, config.max_iterations + 1, runs)


def _fmt(x) -> str:
    return f"{x:.6f}" if isinstance(x, float) else str(x)


def write_summary(summary: RunSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS + ("runs", "cells"))
        for row in summary.rows:
            w.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS] + [summary.runs, len(summary.cells)])


def read_summary(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def write_cells(summary: RunSummary, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "fold", "seed", "iteration", "train_f1", "val_f1", "seconds"])
        for c in summary.cells:
            for i, (tr, va, sec) in enumerate(zip(c.train_f1, c.val_f1, c.seconds)):
                w.writerow([c.run, c.fold, c.seed, i, _fmt(tr), _fmt(va), _fmt(sec)])


def write_cell_rules(summary: RunSummary, directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for c in summary.cells:
        p = directory / f"rule_run{c.run}_fold{c.fold}.txt"
        p.write_text(serialize(c.rule))
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# Ablations

@dataclass
class AblationTable:
    axis: str
    columns: list
    rows: list  # [(label, [values...])]

    def column(self, name) -> list:
        i = self.columns.index(name)
        return [values[i] for _, values in self.rows]

    def value(self, row_label, column):
        i = self.columns.index(column)
        for label, values in self.rows:
            if label == row_label:
                return values[i]
        raise KeyError(row_label)


def write_ablation(table: AblationTable, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([table.axis] + list(table.columns))
        for label, values in table.rows:
            w.writerow([label] + [_fmt(v) for v in values])


def initial_population_f1(dataset, config, runs=10, folds=2, master_seed=None) -> list[float]:
    """Mean training F1 of the initial population, one value per cell."""
    seed = config.rng_seed if master_seed is None else master_seed
    out = []
    for train, _, _, _, s in _tasks(dataset, runs, folds, seed):
        cfg = config.replace(rng_seed=s)
        population, _ = initial_population(dataset, train.positive, cfg, random.Random(s))
        ev = LinkEvaluator(train, dataset)
        out.append(statistics.fmean(ev(r).f1 for r in population))
    return out


def ablate(dataset: Dataset, config: LearnerConfig, axis: str, runs: int = 10, folds: int = 2,
           master_seed: Optional[int] = None, workers: int = 1) -> AblationTable:
    """Compare learner variants on one data set.

    ``representation``: validation F1 at iteration 25 per representation mode.
    ``seeding``: mean initial-population F1, random vs seeded generation.
    ``crossover``: validation F1 at iterations 10 and 25, subtree crossover
    vs the specialized operators.
    """
    kw = dict(runs=runs, folds=folds, master_seed=master_seed, workers=workers, timing=False)
    if axis == "representation":
        cfg = config.replace(max_iterations=max(config.max_iterations, 25))
        rows = []
        for mode in MODES:
            s = cross_validate(dataset, cfg.replace(representation_mode=mode), **kw)
            row = s.at(25)
            rows.append((mode, [row["mean_val_f1"], row["sd_val_f1"]]))
        return AblationTable(axis, ["val_f1_at_25", "sd"], rows)
    if axis == "seeding":
        random_f1 = initial_population_f1(dataset, config.replace(seeding=False), runs, folds, master_seed)
        seeded_f1 = initial_population_f1(dataset, config.replace(seeding=True), runs, folds, master_seed)
        return AblationTable(axis, ["random", "seeded"], [
            ("mean", [statistics.fmean(random_f1), statistics.fmean(seeded_f1)]),
            ("sd", [_sd(random_f1), _sd(seeded_f1)]),
        ])
    if axis == "crossover":
        cfg = config.replace(max_iterations=max(config.max_iterations, 25))
        cols = {}
        for name in ("subtree", "specialized"):
            cols[name] = cross_validate(dataset, cfg.replace(crossover=name), **kw)
        rows = [(f"iteration_{it}", [cols["subtree"].at(it)["mean_val_f1"],
                                     cols["specialized"].at(it)["mean_val_f1"]])
                for it in (10, 25)]
        return AblationTable(axis, ["subtree", "specialized"], rows)
    raise ValueError(f"unknown ablation axis {axis!r}")

