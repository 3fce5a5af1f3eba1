"""Rule execution: scoring entity pairs with a linkage rule.

Two paths share the same semantics:

* the scalar functions (:func:`eval_value`, :func:`eval_comparison`,
  :func:`eval_rule`, ...) score one pair at a time and keep no state;
* :class:`LinkScorer` scores one rule against a fixed list of entity pairs at
  once, caching value sets and distance vectors so that the many rules of a
  population that share subtrees pay for them only once.
"""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from genlink.measures import apply_transform, distance
from genlink.rules import Aggregation, Comparison, LinkageRule, Property

MATCH_THRESHOLD = 0.5

EMPTY = frozenset()


def eval_value(op, entity) -> frozenset:
    """Value set produced by a property or transformation operator."""
    if isinstance(op, Property):
        if entity is None:
            return EMPTY
        return entity.properties.get(op.name, EMPTY)
    return apply_transform(op.function, [eval_value(i, entity) for i in op.inputs])


def score_distance(d: Optional[float], threshold: float) -> float:
    if d is None:
        return 0.0
    if threshold == 0:
        return 1.0 if d == 0 else 0.0
    if d <= threshold:
        return 1.0 - d / threshold
    return 0.0


def eval_comparison(cmp: Comparison, pair) -> float:
    ea, eb = pair
    d = distance(cmp.measure, eval_value(cmp.left, ea), eval_value(cmp.right, eb))
    return score_distance(d, cmp.threshold)


def combine(function: str, scores: Sequence[float], weights: Sequence[float]) -> float:
    if function == "min":
        return min(scores)
    if function == "max":
        return max(scores)
    if function == "wmean":
        return sum(w * s for w, s in zip(weights, scores)) / sum(weights)
    raise ValueError(f"unknown aggregation function {function!r}")


def eval_aggregation(agg: Aggregation, pair) -> float:
    scores = [eval_similarity(op, pair) for op in agg.operands]
    return combine(agg.function, scores, agg.weights)


def eval_similarity(node, pair) -> float:
    if isinstance(node, Comparison):
        return eval_comparison(node, pair)
    return eval_aggregation(node, pair)


def eval_rule(rule: LinkageRule, pair) -> float:
    return eval_similarity(rule.root, pair)


def is_match(rule: LinkageRule, pair) -> bool:
    return eval_rule(rule, pair) >= MATCH_THRESHOLD


class LinkScorer:
    """Scores rules over a fixed sequence of ``(entity_a, entity_b)`` pairs.

    Distances are cached independently of thresholds, so threshold and weight
    changes cost only vectorized arithmetic.  Instances are not shared across
    processes; within a thread they are safe because every cached value is a
    pure function of its key.
    """

    def __init__(self, pairs: Sequence[tuple]):
        self.pairs = list(pairs)
        self.left = [p[0] for p in self.pairs]
        self.right = [p[1] for p in self.pairs]
        self._values: dict = {}
        self._distances: dict = {}

    def __len__(self) -> int:
        return len(self.pairs)

    def values(self, op, side: int) -> list:
        key = (op, side)
        out = self._values.get(key)
        if out is None:
            if isinstance(op, Property):
                entities = self.left if side == 0 else self.right
                out = [EMPTY if e is None else e.properties.get(op.name, EMPTY) for e in entities]
            else:
                columns = [self.values(i, side) for i in op.inputs]
                out = [apply_transform(op.function, list(row)) for row in zip(*columns)]
            self._values[key] = out
        return out

    def distances(self, measure: str, left, right) -> np.ndarray:
        """Distance per pair, NaN where no value pair was comparable."""
        key = (measure, left, right)
        out = self._distances.get(key)
        if out is None:
            a, b = self.values(left, 0), self.values(right, 1)
            out = np.array(
                [np.nan if (d := distance(measure, x, y)) is None else d for x, y in zip(a, b)],
                dtype=float,
            )
            out.flags.writeable = False
            self._distances[key] = out
        return out

    def similarity(self, node) -> np.ndarray:
        if isinstance(node, Comparison):
            d = self.distances(node.measure, node.left, node.right)
            theta = node.threshold
            with np.errstate(invalid="ignore"):
                if theta == 0:
                    return (d == 0).astype(float)
                s = np.where(d <= theta, 1.0 - d / theta, 0.0)
            return s  # NaN <= theta is False, so missing values score 0
        rows = [self.similarity(op) for op in node.operands]
        if node.function == "min":
            return np.minimum.reduce(rows)
        if node.function == "max":
            return np.maximum.reduce(rows)
        # same summation order as combine() so both paths agree bit for bit
        acc = 0.0
        for w, row in zip(node.weights, rows):
            acc = acc + w * row
        return acc / sum(node.weights)

    def scores(self, rule: LinkageRule) -> np.ndarray:
        return self.similarity(rule.root)

    def matches(self, rule: LinkageRule) -> np.ndarray:
        return self.scores(rule) >= MATCH_THRESHOLD

    def clear(self) -> None:
        self._values.clear()
        self._distances.clear()


def _similarity_matrix(node, values_a, values_b, cache) -> np.ndarray:
    if isinstance(node, Comparison):
        key = (node.measure, node.left, node.right)
        d = cache.get(key)
        if d is None:
            xs = values_a(node.left)
            ys = values_b(node.right)
            d = np.array([[np.nan if (v := distance(node.measure, x, y)) is None else v
                           for y in ys] for x in xs], dtype=float).reshape(len(xs), len(ys))
            cache[key] = d
        theta = node.threshold
        with np.errstate(invalid="ignore", divide="ignore"):
            if theta == 0:
                return (d == 0).astype(float)
            return np.where(d <= theta, 1.0 - d / theta, 0.0)
    rows = [_similarity_matrix(op, values_a, values_b, cache) for op in node.operands]
    if node.function == "min":
        return np.minimum.reduce(rows)
    if node.function == "max":
        return np.maximum.reduce(rows)
    acc = 0.0
    for w, row in zip(node.weights, rows):
        acc = acc + w * row
    return acc / sum(node.weights)


def score_matrix(rule: LinkageRule, entities_a: Sequence, entities_b: Sequence) -> np.ndarray:
    """Scores of every ``(a, b)`` combination as an ``len(a) x len(b)`` array."""
    memo_a: dict = {}
    memo_b: dict = {}

    def values_a(op):
        if op not in memo_a:
            memo_a[op] = [eval_value(op, e) for e in entities_a]
        return memo_a[op]

    def values_b(op):
        if op not in memo_b:
            memo_b[op] = [eval_value(op, e) for e in entities_b]
        return memo_b[op]

    return _similarity_matrix(rule.root, values_a, values_b, {})


def match_sources(rule: LinkageRule, entities_a: Sequence, entities_b: Sequence,
                  chunk: int = 512, skip_same_id: bool = False):
    """Yield ``(a, b, score)`` for every combination scoring at least 0.5.

    Rows of ``entities_a`` are processed in chunks to bound memory.
    """
    for start in range(0, len(entities_a), chunk):
        block = entities_a[start:start + chunk]
        scores = score_matrix(rule, block, entities_b)
        for i, j in zip(*np.nonzero(scores >= MATCH_THRESHOLD)):
            a, b = block[i], entities_b[j]
            if skip_same_id and a.id == b.id:
                continue
            yield a, b, float(scores[i, j])
