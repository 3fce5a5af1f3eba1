import random

import pytest

from genlink.data import Dataset, Entity, EntitySource, ReferenceLinkSet
from genlink.rules import (
    AGGREGATIONS,
    MEASURES,
    TRANSFORMS,
    Aggregation,
    Comparison,
    LinkageRule,
    Property,
    Transform,
)


def entity(eid, source="A", **props):
    """Entity whose keyword values are strings or collections of strings."""
    values = {}
    for k, v in props.items():
        values[k] = frozenset([v]) if isinstance(v, str) else frozenset(v)
    return Entity(eid, values, source)


def source(label, entities):
    return EntitySource(label, {e.id: e for e in entities})


def city_rule(geo_threshold=50_000.0):
    """min( levenshtein(lower(label), lower(label)), geographic(point, coord) )."""
    label = Comparison("levenshtein", 1.0,
                       Transform("lowerCase", (Property("A", "label"),)),
                       Transform("lowerCase", (Property("B", "label"),)))
    geo = Comparison("geographic", geo_threshold, Property("A", "point"), Property("B", "coord"))
    return LinkageRule(Aggregation("min", (label, geo)))


@pytest.fixture
def fig_rule():
    return city_rule()


NAMES = ["label", "name", "title", "date", "point", "p q", 'we"ird', "x.y:z", "ü"]


def random_value_op(rng, side, depth):
    if depth <= 0 or rng.random() < 0.4:
        return Property(side, rng.choice(NAMES))
    fn = rng.choice(sorted(TRANSFORMS))
    inputs = tuple(random_value_op(rng, side, depth - 1) for _ in range(TRANSFORMS[fn]))
    return Transform(fn, inputs)


def random_similarity(rng, depth=3):
    weight = rng.choice([1.0, 0.5, 2.0, rng.uniform(0.01, 10)])
    if depth <= 0 or rng.random() < 0.4:
        theta = rng.choice([0.0, 1.0, rng.uniform(0, 5), rng.uniform(0, 1e5)])
        return Comparison(rng.choice(MEASURES), theta, random_value_op(rng, "A", 3),
                          random_value_op(rng, "B", 3), weight)
    ops = tuple(random_similarity(rng, depth - 1) for _ in range(rng.randint(1, 3)))
    return Aggregation(rng.choice(AGGREGATIONS), ops, weight)


def random_tree(rng):
    """An arbitrary well-typed rule, independent of the library's generator."""
    return LinkageRule(random_similarity(rng))


def random_entity(rng, eid, side):
    pool = ["Berlin", "berlin", "BERLIN city", "2001-01-01", "2001-01-09", "52.5 13.4", "52.6 13.3",
            "1", "3.5", "http://x.org/Berlin", "a_b c", ""]
    props = {}
    for name in NAMES:
        k = rng.randint(0, 2)
        if k:
            props[name] = [rng.choice(pool) for _ in range(k)]
    return entity(eid, side, **props)


def toy_dataset(n=12, seed=0):
    """Positives share an exact name; negatives pair different names."""
    rng = random.Random(seed)
    names = [f"name{i:02d}" for i in range(n)]
    a = source("A", [entity(f"a{i}", "A", name=nm, noise=str(rng.random())) for i, nm in enumerate(names)])
    b = source("B", [entity(f"b{i}", "B", name=nm, other=str(rng.random())) for i, nm in enumerate(names)])
    pos = [(f"a{i}", f"b{i}") for i in range(n)]
    neg = [(f"a{i}", f"b{(i + 1) % n}") for i in range(n)]
    return Dataset("toy", a, b, ReferenceLinkSet(pos, neg))


# -- acceptance reporting ------------------------------------------------------

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(name, passed, detail)``."""
    def record(name, passed, detail=""):
        status = {True: "PASS", False: "FAIL", None: "SKIP"}[passed]
        _CRITERIA.append(f"criterion {name}: {status} {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
