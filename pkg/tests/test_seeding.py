import random

import pytest

from conftest import entity
from genlink.modes import MODES, conforms, constrain, repair
from genlink.rules import Aggregation, Comparison, Property, Transform, validate, walk
from genlink.seeding import (
    CompatiblePair,
    RuleGenerator,
    all_property_pairs,
    find_compatible_properties,
    random_rule,
    random_threshold,
)
from conftest import random_tree


def test_city_entities_compatible_pairs():
    a = entity("a", "A", label="Berlin", point="52.5200 13.4050")
    b = entity("b", "B", label="Berlin", coord="52.5201 13.4049")
    pairs = find_compatible_properties([(a, b)], measures=("levenshtein", "geographic"))
    assert set(pairs) == {CompatiblePair("label", "label", "levenshtein"),
                          CompatiblePair("point", "coord", "geographic")}


def test_no_similar_values():
    a = entity("a", "A", x="alpha")
    b = entity("b", "B", y="omega")
    assert find_compatible_properties([(a, b)]) == []


def test_identical_single_property():
    pair = (entity("a", "A", p="same value"), entity("b", "B", p="same value"))
    assert find_compatible_properties([pair]) == [CompatiblePair("p", "p", "levenshtein")]


def test_lowercase_tokens_compared():
    pair = (entity("a", "A", name="John Smith"), entity("b", "B", full="Dr SMITH"))
    assert find_compatible_properties([pair]) == [CompatiblePair("name", "full", "levenshtein")]


def test_single_pair_rule():
    class Forced(random.Random):
        def random(self):
            return 0.99  # never add a transformation

        def choice(self, seq):
            return seq[0] if "min" not in seq else "min"

    rule = random_rule([CompatiblePair("label", "label", "levenshtein")], Forced(0))
    assert isinstance(rule.root, Aggregation) and rule.root.function == "min"
    (cmp,) = rule.root.operands
    assert cmp.measure == "levenshtein"
    assert cmp.left == Property("A", "label") and cmp.right == Property("B", "label")


def test_boolean_mode_generation():
    gen = RuleGenerator(all_property_pairs(["a", "b"], ["c"]), "boolean")
    rng = random.Random(0)
    for _ in range(500):
        rule = gen(rng)
        assert rule.root.function in ("min", "max")
        assert not any(isinstance(n, Transform) for _, n in walk(rule.root))


def test_random_rules_validate():
    pairs = all_property_pairs(["a", "b", "c"], ["x", "y"]) + [CompatiblePair("d", "z", "date")]
    rng = random.Random(1)
    for mode in MODES:
        gen = RuleGenerator(pairs, mode)
        for _ in range(2500):
            rule = gen(rng)
            assert validate(rule).ok
            assert conforms(rule, mode)
            assert 1 <= len(rule.root.operands) <= 2


def test_empty_pairs():
    with pytest.raises(ValueError, match="seeding produced no compatible properties"):
        random_rule([], random.Random(0))


def test_threshold_ranges():
    rng = random.Random(2)
    for _ in range(1000):
        assert 0.05 <= random_threshold("levenshtein", rng) <= 5.0
        assert 0.1 <= random_threshold("numeric", rng, 1000.0) <= 100.0


def test_repair_conforms_and_validates():
    rng = random.Random(3)
    for _ in range(2000):
        rule = random_tree(rng)
        for mode in MODES:
            fixed = repair(rule, mode)
            assert conforms(fixed, mode), mode
            assert validate(fixed).ok


def test_full_mode_repair_is_identity():
    rng = random.Random(4)
    for _ in range(200):
        rule = random_tree(rng)
        assert repair(rule, "full") is rule


def test_linear_mode_shape():
    rng = random.Random(5)
    for _ in range(300):
        rule = repair(random_tree(rng), "linear")
        assert rule.root.function == "wmean"
        assert all(isinstance(op, Comparison) for op in rule.root.operands)


def test_unknown_mode():
    with pytest.raises(ValueError):
        constrain("fuzzy")
