"""Initial population: compatible property pairs and random rules."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterable, Optional

from genlink.measures import distance, lower_case, parse_number, tokenize
from genlink.modes import constrain
from genlink.rules import TRANSFORMS, Aggregation, Comparison, LinkageRule, Property, Transform

DEFAULT_SEEDING_THRESHOLDS = {
    "levenshtein": 1.0,
    "jaccard": 0.5,
    "numeric": 1.0,
    "geographic": 1000.0,
    "date": 1.0,
}

# Upper ends of the threshold initialization ranges (native units).
THRESHOLD_CEILINGS = {
    "levenshtein": 5.0,
    "jaccard": 1.0,
    "geographic": 50_000.0,
    "date": 365.0,
}
_TOKEN_MEASURES = ("levenshtein", "jaccard")


@dataclass(frozen=True)
class CompatiblePair:
    property_a: str
    property_b: str
    measure: str


def find_compatible_properties(entity_pairs: Iterable[tuple], measures=("levenshtein",),
                               thresholds: Optional[dict] = None) -> list[CompatiblePair]:
    """Property pairs whose normalized values are close on some positive link.

    String measures compare lower-cased tokens; numeric, geographic and date
    values are only lower-cased, since tokenizing would break them apart.
    """
    thresholds = {**DEFAULT_SEEDING_THRESHOLDS, **(thresholds or {})}
    found: dict = {}
    for ea, eb in entity_pairs:
        if ea is None or eb is None:
            continue
        for pa, va in ea.properties.items():
            la = lower_case(va)
            ta = tokenize(la)
            for pb, vb in eb.properties.items():
                lb = lower_case(vb)
                tb = None
                for measure in measures:
                    pair = CompatiblePair(pa, pb, measure)
                    if pair in found:
                        continue
                    if measure in _TOKEN_MEASURES:
                        if tb is None:
                            tb = tokenize(lb)
                        d = distance(measure, ta, tb)
                    else:
                        d = distance(measure, la, lb)
                    if d is not None and d < thresholds[measure]:
                        found[pair] = None
    return list(found)


def all_property_pairs(names_a, names_b, measure: str = "levenshtein") -> list[CompatiblePair]:
    return [CompatiblePair(a, b, measure) for a in names_a for b in names_b]


def numeric_ranges(source_a, source_b, pairs) -> dict:
    """Observed value range per numeric pair, for threshold initialization."""
    out = {}
    for pair in pairs:
        if pair.measure != "numeric":
            continue
        xs = []
        for src, name in ((source_a, pair.property_a), (source_b, pair.property_b)):
            for e in src.entities.values():
                for v in e.properties.get(name, ()):
                    x = parse_number(v)
                    if x is not None:
                        xs.append(x)
        out[pair] = (max(xs) - min(xs)) if xs else 0.0
    return out


def random_threshold(measure: str, rng: random.Random, value_range: Optional[float] = None) -> float:
    """Log-uniform draw from ``[ceiling / 100, ceiling]``."""
    if measure == "numeric":
        hi = 0.1 * value_range if value_range else 1.0
    else:
        hi = THRESHOLD_CEILINGS[measure]
    return math.exp(rng.uniform(math.log(hi / 100.0), math.log(hi)))


class RuleGenerator:
    """Draws random linkage rules from a list of compatible pairs."""

    def __init__(self, pairs, mode: str = "full", ranges: Optional[dict] = None):
        self.pairs = list(pairs)
        self.mode = mode
        self.pools = constrain(mode)
        self.ranges = ranges or {}
        self.props_a = list(dict.fromkeys(p.property_a for p in self.pairs))
        self.props_b = list(dict.fromkeys(p.property_b for p in self.pairs))
        self.transforms = sorted(TRANSFORMS)

    def _value(self, source, name, rng):
        node = Property(source, name)
        if self.pools.transformations and rng.random() < 0.5:
            fn = rng.choice(self.transforms)
            if fn == "concatenate":
                pool = self.props_a if source == "A" else self.props_b
                node = Transform(fn, (node, Property(source, rng.choice(pool))))
            else:
                node = Transform(fn, (node,))
        return node

    def comparison(self, rng) -> Comparison:
        pair = rng.choice(self.pairs)
        left = self._value("A", pair.property_a, rng)
        right = self._value("B", pair.property_b, rng)
        theta = random_threshold(pair.measure, rng, self.ranges.get(pair))
        return Comparison(pair.measure, theta, left, right)

    def __call__(self, rng: random.Random) -> LinkageRule:
        if not self.pairs:
            raise ValueError("seeding produced no compatible properties")
        fn = rng.choice(self.pools.aggregations)
        n = rng.choice((1, 2))
        return LinkageRule(Aggregation(fn, tuple(self.comparison(rng) for _ in range(n))))


def random_rule(pairs, rng: random.Random, mode: str = "full", ranges: Optional[dict] = None):
    return RuleGenerator(pairs, mode, ranges)(rng)
