"""Command-line interface: ``genlink learn|match|eval|bench``.

Exit codes: 0 success, 1 input or validation error, 2 internal invariant
violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from genlink.data import DataError, Dataset, load_dataset, load_entities, load_links, ReferenceLinkSet
from genlink.execute import match_sources
from genlink.harness import (
    ablate,
    cross_validate,
    evaluate,
    write_ablation,
    write_cell_rules,
    write_cells,
    write_summary,
)
from genlink.learner import LearnerConfig, load_config, learn
from genlink.modes import MODES
from genlink.rules import RuleParseError, parse, serialize, validate
from genlink.synthetic import SUITE, load_synthetic

log = logging.getLogger("genlink")

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 1, 2

HISTORY_COLUMNS = ("iteration", "fitness", "mcc", "operator_count", "train_f1",
                   "max_train_f1", "mean_train_f1", "seconds")


class InvariantError(RuntimeError):
    """An internal consistency check failed."""


class InputError(ValueError):
    pass


def _seed(args):
    env = os.environ.get("GENLINK_SEED")
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise InputError(f"GENLINK_SEED must be an integer, found {env!r}") from None
    return args.seed


def _config(args) -> LearnerConfig:
    config = load_config(args.config) if args.config else LearnerConfig()
    changes = {}
    seed = _seed(args)
    if seed is not None:
        changes["rng_seed"] = seed
    if getattr(args, "mode", None):
        changes["representation_mode"] = args.mode
    if getattr(args, "iterations", None) is not None:
        changes["max_iterations"] = args.iterations
    if getattr(args, "population", None) is not None:
        changes["population_size"] = args.population
    return config.replace(**changes) if changes else config


def _dataset(args, seed) -> Dataset:
    if getattr(args, "synthetic", None):
        return load_synthetic(args.synthetic, seed or 0)
    if not args.source_a or not args.links:
        raise InputError("--source-a and --links are required (or --synthetic NAME)")
    return load_dataset(args.source_a, args.links, args.source_b, args.format, seed=seed or 0)


def _read_rule(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse(text)


def _fmt(x) -> str:
    return f"{x:.6f}" if isinstance(x, float) else str(x)


def history_path(rule_path) -> Path:
    p = Path(rule_path)
    return p.with_name(p.stem + ".history.csv")


def cmd_learn(args) -> int:
    config = _config(args)
    dataset = _dataset(args, config.rng_seed)
    result = learn(dataset, dataset.links.positive, dataset.links.negative, config)
    report = validate(result.rule)
    if not report.ok:
        raise InvariantError(f"learned rule is invalid: {report}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(serialize(result.rule), encoding="utf-8")
    with open(history_path(out), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for h in result.history:
            seconds = 0.0 if args.no_timing else h.seconds
            w.writerow([h.iteration, _fmt(h.best.fitness), _fmt(h.best.mcc), h.best.operator_count,
                        _fmt(h.best.train_f1), _fmt(h.max_train_f1), _fmt(h.mean_train_f1),
                        _fmt(seconds)])
    print(json.dumps({"rule": str(out), "iterations": len(result.history) - 1,
                      "train_f1": result.report.train_f1, "fitness": result.report.fitness}))
    return EXIT_OK


def cmd_match(args) -> int:
    if not args.source_a or not args.rule or not args.out:
        raise InputError("match needs --source-a, --rule and --out")
    rule = _read_rule(args.rule)
    a = load_entities(args.source_a, args.format, "A")
    self_join = args.source_b is None
    b = a.relabel("B") if self_join else load_entities(args.source_b, args.format, "B")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_id", "target_id", "score"])
        for ea, eb, score in match_sources(rule, list(a.entities.values()),
                                           list(b.entities.values()), skip_same_id=self_join):
            if not 0.0 <= score <= 1.0:
                raise InvariantError(f"score {score} outside [0, 1]")
            w.writerow([ea.id, eb.id, _fmt(score)])
            n += 1
    log.info("wrote %d links to %s", n, out)
    return EXIT_OK


def cmd_eval(args) -> int:
    if not args.rule:
        raise InputError("eval needs --rule")
    rule = _read_rule(args.rule)
    if args.synthetic:
        dataset = load_synthetic(args.synthetic, _seed(args) or 0)
    else:
        if not args.source_a or not args.links:
            raise InputError("eval needs --source-a and --links (or --synthetic NAME)")
        a = load_entities(args.source_a, args.format, "A")
        b = a.relabel("B") if args.source_b is None else load_entities(args.source_b, args.format, "B")
        rows = load_links(args.links, a, b)
        links = ReferenceLinkSet([(x, y) for x, y, l in rows if l == "+"],
                                 [(x, y) for x, y, l in rows if l == "-"])
        dataset = Dataset(Path(args.source_a).stem, a, b, links)
    result = evaluate(rule, dataset.links, dataset)
    print(json.dumps(result.as_dict()))
    return EXIT_OK


def cmd_bench(args) -> int:
    config = _config(args)
    dataset = _dataset(args, config.rng_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    workers = max(1, args.threads)
    if args.axis:
        table = ablate(dataset, config, args.axis, runs=args.runs, folds=args.folds, workers=workers)
        path = out / f"ablation_{args.axis}.csv"
        write_ablation(table, path)
        print(json.dumps({"ablation": str(path)}))
        return EXIT_OK
    summary = cross_validate(dataset, config, runs=args.runs, folds=args.folds,
                             workers=workers, timing=not args.no_timing)
    if len(summary.rows) != config.max_iterations + 1:
        raise InvariantError("summary row count does not match iterations")
    write_summary(summary, out / "summary.csv")
    write_cells(summary, out / "cells.csv")
    write_cell_rules(summary, out / "rules")
    last = summary.rows[-1]
    print(json.dumps({"summary": str(out / "summary.csv"),
                      "mean_val_f1": last["mean_val_f1"], "sd_val_f1": last["sd_val_f1"]}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genlink", description="Learn and apply linkage rules.")
    parser.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = parser.add_subparsers(dest="command", required=True)

    def data_flags(p):
        p.add_argument("--source-a", help="entities of source A")
        p.add_argument("--source-b", help="entities of source B (default: match A with itself)")
        p.add_argument("--format", choices=("csv", "ntriples"), default="csv")

    def learner_flags(p):
        p.add_argument("--links", help="reference links CSV")
        p.add_argument("--config", help="learner config file (key = value)")
        p.add_argument("--seed", type=int, help="master seed (GENLINK_SEED overrides)")
        p.add_argument("--mode", choices=MODES, help="representation mode")
        p.add_argument("--iterations", type=int, help="override max_iterations")
        p.add_argument("--population", type=int, help="override population_size")
        p.add_argument("--synthetic", choices=sorted(SUITE), help="use a built-in synthetic data set")
        p.add_argument("--no-timing", action="store_true",
                       help="write zero seconds so output is byte-reproducible")

    p = sub.add_parser("learn", help="learn a rule from reference links")
    data_flags(p)
    learner_flags(p)
    p.add_argument("--out", required=True, help="rule file to write")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("match", help="apply a rule to every pair of two sources")
    data_flags(p)
    p.add_argument("--rule", required=True)
    p.add_argument("--out", required=True, help="links CSV to write")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval", help="score a rule against reference links")
    data_flags(p)
    p.add_argument("--rule", required=True)
    p.add_argument("--links")
    p.add_argument("--seed", type=int)
    p.add_argument("--synthetic", choices=sorted(SUITE))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="repeated cross-validation or an ablation")
    data_flags(p)
    learner_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--axis", choices=("representation", "seeding", "crossover"))
    p.add_argument("--runs", type=int, default=10)
    p.add_argument("--folds", type=int, default=2)
    p.add_argument("--threads", type=int, default=1, help="worker processes; results do not depend on it")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (InvariantError, AssertionError) as exc:
        print(f"genlink: internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DataError, RuleParseError, InputError, ValueError, OSError) as exc:
        print(f"genlink: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
