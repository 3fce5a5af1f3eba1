"""Representation modes restricting the rule space.

``boolean``   min/max over comparisons, no transformations, no nesting
``linear``    a single wmean over comparisons, no transformations
``nonlinear`` any aggregation, nesting allowed, no transformations
``full``      everything
"""
from __future__ import annotations

from dataclasses import dataclass

from genlink.rules import (
    AGGREGATIONS,
    Aggregation,
    Comparison,
    LinkageRule,
    Transform,
    walk,
)

MODES = ("boolean", "linear", "nonlinear", "full")


@dataclass(frozen=True)
class Pools:
    aggregations: tuple
    transformations: bool
    nesting: bool
    bare_comparison: bool  # may the root be a comparison on its own?


_POOLS = {
    "boolean": Pools(("min", "max"), False, False, False),
    "linear": Pools(("wmean",), False, False, False),
    "nonlinear": Pools(AGGREGATIONS, False, True, True),
    "full": Pools(AGGREGATIONS, True, True, True),
}


def constrain(mode: str) -> Pools:
    try:
        return _POOLS[mode]
    except KeyError:
        raise ValueError(f"unknown representation mode {mode!r}") from None


def conforms(rule: LinkageRule, mode: str) -> bool:
    pools = constrain(mode)
    root = rule.root
    if isinstance(root, Comparison) and not pools.bare_comparison:
        return False
    for path, node in walk(root):
        if isinstance(node, Transform) and not pools.transformations:
            return False
        if isinstance(node, Aggregation):
            if node.function not in pools.aggregations:
                return False
            if path and not pools.nesting:
                return False
    return True


def _strip(node):
    if isinstance(node, Transform):
        return _strip(node.inputs[0])
    return node


def _strip_transforms(node):
    if isinstance(node, Comparison):
        return Comparison(node.measure, node.threshold, _strip(node.left), _strip(node.right),
                          node.weight)
    return Aggregation(node.function, tuple(_strip_transforms(o) for o in node.operands),
                       node.weight)


def repair(rule: LinkageRule, mode: str) -> LinkageRule:
    """Smallest edit bringing ``rule`` into ``mode``.

    Transformations collapse to their first input's underlying property,
    nested aggregations are flattened into the root, and aggregation
    functions outside the pool become the pool's first function.
    """
    if conforms(rule, mode):
        return rule
    pools = constrain(mode)
    root = rule.root
    if not pools.transformations:
        root = _strip_transforms(root)
    if not pools.nesting:
        comps = tuple(n for _, n in walk(root) if isinstance(n, Comparison))
        fn = root.function if isinstance(root, Aggregation) else pools.aggregations[0]
        root = Aggregation(fn, comps)
    if isinstance(root, Comparison) and not pools.bare_comparison:
        root = Aggregation(pools.aggregations[0], (root,))

    def fix(node):
        if isinstance(node, Aggregation):
            fn = node.function if node.function in pools.aggregations else pools.aggregations[0]
            return Aggregation(fn, tuple(fix(o) for o in node.operands), node.weight)
        return node

    return LinkageRule(fix(root))
