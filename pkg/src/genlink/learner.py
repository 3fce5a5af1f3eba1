"""Genetic-programming learner for linkage rules."""
from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from genlink.crossover import OPERATOR_SETS
from genlink.execute import LinkScorer
from genlink.modes import MODES, repair
from genlink.rules import LinkageRule, count_operators
from genlink.seeding import (
    DEFAULT_SEEDING_THRESHOLDS,
    RuleGenerator,
    all_property_pairs,
    find_compatible_properties,
    numeric_ranges,
)

log = logging.getLogger(__name__)


@dataclass
class LearnerConfig:
    population_size: int = 500
    max_iterations: int = 50
    tournament_size: int = 5
    p_crossover: float = 0.75
    p_mutation: float = 0.25
    penalty_per_operator: float = 0.05
    seeding_measures: tuple = ("levenshtein",)
    seeding_thresholds: dict = field(default_factory=lambda: dict(DEFAULT_SEEDING_THRESHOLDS))
    representation_mode: str = "full"
    rng_seed: int = 0
    # ablation switches
    seeding: bool = True
    crossover: str = "specialized"

    def __post_init__(self):
        if not math.isclose(self.p_crossover + self.p_mutation, 1.0):
            raise ValueError("p_crossover + p_mutation must equal 1")
        if not 1 <= self.tournament_size < self.population_size:
            raise ValueError("need population_size > tournament_size >= 1")
        if self.representation_mode not in MODES:
            raise ValueError(f"unknown representation mode {self.representation_mode!r}")
        if self.crossover not in OPERATOR_SETS:
            raise ValueError(f"unknown crossover set {self.crossover!r}")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        self.seeding_measures = tuple(self.seeding_measures)

    def replace(self, **changes) -> "LearnerConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        if "p_mutation" in changes and "p_crossover" not in changes:
            values["p_crossover"] = 1.0 - values["p_mutation"]
        return LearnerConfig(**values)


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def load_config(path) -> LearnerConfig:
    """Read ``key = value`` lines; ``#`` starts a comment.

    Per-measure seeding thresholds use ``seeding_threshold.<measure> = x``.
    Unknown keys are an error.
    """
    kinds = {f.name: f for f in fields(LearnerConfig)}
    values: dict = {}
    thresholds = dict(DEFAULT_SEEDING_THRESHOLDS)
    text = Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("seeding_threshold."):
            thresholds[key.split(".", 1)[1]] = float(value)
            continue
        if key not in kinds or key == "seeding_thresholds":
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        default = getattr(LearnerConfig(), key)
        if isinstance(default, bool):
            if value.lower() not in _BOOL:
                raise ValueError(f"{path}:{lineno}: expected a boolean for {key}")
            values[key] = _BOOL[value.lower()]
        elif isinstance(default, int):
            values[key] = int(value)
        elif isinstance(default, float):
            values[key] = float(value)
        elif isinstance(default, tuple):
            values[key] = tuple(v.strip() for v in value.split(",") if v.strip())
        else:
            values[key] = value
    if "p_mutation" in values and "p_crossover" not in values:
        values["p_crossover"] = 1.0 - values["p_mutation"]
    if "p_crossover" in values and "p_mutation" not in values:
        values["p_mutation"] = 1.0 - values["p_crossover"]
    return LearnerConfig(seeding_thresholds=thresholds, **values)


def dump_config(config: LearnerConfig) -> str:
    lines = []
    for f in fields(config):
        value = getattr(config, f.name)
        if f.name == "seeding_thresholds":
            lines += [f"seeding_threshold.{k} = {v!r}" for k, v in value.items()]
        elif isinstance(value, tuple):
            lines.append(f"{f.name} = {', '.join(value)}")
        elif isinstance(value, bool):
            lines.append(f"{f.name} = {str(value).lower()}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Fitness

def mcc(tp: int, tn: int, fp: int, fn: int) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def f1_score(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


@dataclass(frozen=True)
class FitnessReport:
    tp: int
    tn: int
    fp: int
    fn: int
    mcc: float
    operator_count: int
    fitness: float
    train_f1: float


class FitnessEvaluator:
    """Fitness of rules against a fixed set of labelled entity pairs.

    Positives come first in the scorer, negatives after.
    """

    def __init__(self, positive_pairs, negative_pairs, penalty: float = 0.05):
        self.scorer = LinkScorer(list(positive_pairs) + list(negative_pairs))
        self.n_pos = len(positive_pairs)
        self.n_neg = len(negative_pairs)
        self.penalty = penalty
        self._cache: dict = {}

    def confusion(self, rule: LinkageRule) -> tuple[int, int, int, int]:
        m = self.scorer.matches(rule)
        tp = int(np.count_nonzero(m[: self.n_pos]))
        fp = int(np.count_nonzero(m[self.n_pos:]))
        return tp, self.n_neg - fp, fp, self.n_pos - tp

    def __call__(self, rule: LinkageRule) -> FitnessReport:
        report = self._cache.get(rule)
        if report is None:
            tp, tn, fp, fn = self.confusion(rule)
            m = mcc(tp, tn, fp, fn)
            ops = count_operators(rule)
            report = FitnessReport(tp, tn, fp, fn, m, ops, m - self.penalty * ops,
                                   f1_score(tp, fp, fn)[2])
            self._cache[rule] = report
        return report


def fitness(rule: LinkageRule, positive, negative, dataset, penalty: float = 0.05) -> FitnessReport:
    """Fitness of ``rule`` on reference links resolved through ``dataset``."""
    ev = FitnessEvaluator([dataset.pair(l) for l in positive],
                          [dataset.pair(l) for l in negative], penalty)
    return ev(rule)


# ---------------------------------------------------------------------------
# Selection and breeding

def _rank_key(report: FitnessReport, index: int):
    return (-report.fitness, report.operator_count, index)


def tournament_select(population, reports, size: int, rng: random.Random) -> LinkageRule:
    """Fittest of ``size`` uniform draws with replacement.

    Ties go to fewer operators, then to the earlier draw.
    """
    best = None
    for order in range(size):
        i = rng.randrange(len(population))
        key = (-reports[i].fitness, reports[i].operator_count, order)
        if best is None or key < best[0]:
            best = (key, i)
    return population[best[1]]


def best_index(reports) -> int:
    return min(range(len(reports)), key=lambda i: _rank_key(reports[i], i))


def breed(population, reports, config: LearnerConfig, generate: Callable,
          rng: random.Random) -> list[LinkageRule]:
    """One generation of tournament selection and crossover.

    With probability ``p_mutation`` the second parent is a fresh random rule
    (headless-chicken mutation).
    """
    operators = OPERATOR_SETS[config.crossover]
    mode = config.representation_mode
    out = []
    while len(out) < config.population_size:
        r1 = tournament_select(population, reports, config.tournament_size, rng)
        r2 = tournament_select(population, reports, config.tournament_size, rng)
        op = rng.choice(operators)
        if rng.random() < config.p_mutation:
            r2 = generate(rng)
        out.append(repair(op(r1, r2, rng), mode))
    return out


# ---------------------------------------------------------------------------
# Main loop

@dataclass
class IterationRecord:
    iteration: int
    best_rule: LinkageRule
    best: FitnessReport
    max_train_f1: float
    mean_train_f1: float
    seconds: float


@dataclass
class LearnResult:
    rule: LinkageRule
    history: list = field(default_factory=list)  # [IterationRecord]
    pairs: list = field(default_factory=list)
    initial_population: list = field(default_factory=list)

    @property
    def report(self) -> FitnessReport:
        return self.history[-1].best


def seed_pairs(dataset, positive, config: LearnerConfig) -> list:
    """Compatible pairs for seeding, falling back to every property pair."""
    pairs = []
    if config.seeding:
        pairs = find_compatible_properties(
            [dataset.pair(l) for l in positive],
            config.seeding_measures,
            config.seeding_thresholds,
        )
        if not pairs:
            log.warning("seeding produced no compatible properties; using all property pairs")
    if not pairs:
        pairs = all_property_pairs(dataset.source_a.property_names,
                                   dataset.source_b.property_names)
    if not pairs:
        raise ValueError("sources have no properties to compare")
    return pairs


def initial_population(dataset, positive, config: LearnerConfig, rng: random.Random):
    pairs = seed_pairs(dataset, positive, config)
    ranges = numeric_ranges(dataset.source_a, dataset.source_b, pairs)
    generate = RuleGenerator(pairs, config.representation_mode, ranges)
    return [generate(rng) for _ in range(config.population_size)], generate


def learn(dataset, positive, negative, config: LearnerConfig,
          on_iteration: Optional[Callable[[IterationRecord], None]] = None) -> LearnResult:
    """Evolve a linkage rule from reference links.

    Stops after ``max_iterations`` generations or once a rule reaches a
    training F1 of 1.  Returns the fittest rule of the final population and
    one :class:`IterationRecord` per evaluated generation (iteration 0 is the
    initial population).
    """
    if not positive or not negative:
        raise ValueError("learning needs positive and negative reference links")
    rng = random.Random(config.rng_seed)
    evaluate = FitnessEvaluator([dataset.pair(l) for l in positive],
                                [dataset.pair(l) for l in negative],
                                config.penalty_per_operator)
    start = time.perf_counter()
    population, generate = initial_population(dataset, positive, config, rng)
    result = LearnResult(rule=None, pairs=generate.pairs, initial_population=list(population))

    iteration = 0
    while True:
        reports = [evaluate(r) for r in population]
        i = best_index(reports)
        f1s = [r.train_f1 for r in reports]
        record = IterationRecord(iteration, population[i], reports[i], max(f1s),
                                 sum(f1s) / len(f1s), time.perf_counter() - start)
        result.history.append(record)
        if on_iteration is not None:
            on_iteration(record)
        log.info("iteration %d: fitness %.4f train F1 %.4f (max %.4f)",
                 iteration, reports[i].fitness, reports[i].train_f1, record.max_train_f1)
        if iteration >= config.max_iterations or record.max_train_f1 >= 1.0:
            break
        population = breed(population, reports, config, generate, rng)
        iteration += 1
    result.rule = population[i]
    return result
