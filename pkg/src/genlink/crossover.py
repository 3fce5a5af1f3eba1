"""Crossover operators over linkage rules.

Every operator takes ``(r1, r2, rng)`` and returns a new rule derived from
``r1``.  When a parent lacks the node kind an operator needs, ``r1`` is
returned unchanged.
"""
from __future__ import annotations

import random

from genlink.rules import (
    Aggregation,
    Comparison,
    LinkageRule,
    Transform,
    is_similarity_op,
    properties,
    replace_at,
    walk,
    with_weight,
)


def _nodes(rule, kind):
    return [(p, n) for p, n in walk(rule.root) if isinstance(n, kind)]


def _side(node) -> str:
    return properties(node)[0].source


def _rebuild(r1, path, node):
    return LinkageRule(replace_at(r1.root, path, node))


def crossover_function(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Copy the function (transformation, distance or aggregation) of a node
    in ``r2`` onto a node of the same kind in ``r1``."""
    kind = rng.choice((Transform, Comparison, Aggregation))
    nodes1 = _nodes(r1, kind)
    nodes2 = _nodes(r2, kind)
    if not nodes1 or not nodes2:
        return r1
    path, n1 = rng.choice(nodes1)
    if kind is Transform:
        # only swap between transformations of equal arity
        nodes2 = [(p, n) for p, n in nodes2 if len(n.inputs) == len(n1.inputs)]
        if not nodes2:
            return r1
    _, n2 = rng.choice(nodes2)
    if kind is Transform:
        new = Transform(n2.function, n1.inputs)
    elif kind is Comparison:
        new = Comparison(n2.measure, n1.threshold, n1.left, n1.right, n1.weight)
    else:
        new = Aggregation(n2.function, n1.operands, n1.weight)
    return _rebuild(r1, path, new)


def crossover_operators(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Pool the operands of one aggregation from each rule and keep each with
    probability one half (at least one survives)."""
    aggs1 = _nodes(r1, Aggregation)
    aggs2 = _nodes(r2, Aggregation)
    if not aggs1 or not aggs2:
        return r1
    path, agg1 = rng.choice(aggs1)
    _, agg2 = rng.choice(aggs2)
    pool = agg1.operands + agg2.operands
    kept = [op for op in pool if rng.random() > 0.5]
    if not kept:
        kept = [rng.choice(pool)]
    return _rebuild(r1, path, Aggregation(agg1.function, tuple(kept), agg1.weight))


def crossover_aggregation(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Replace a similarity node of ``r1`` with a similarity node of ``r2``."""
    sims1 = [(p, n) for p, n in walk(r1.root) if is_similarity_op(n)]
    sims2 = [(p, n) for p, n in walk(r2.root) if is_similarity_op(n)]
    path, _ = rng.choice(sims1)
    _, o2 = rng.choice(sims2)
    return _rebuild(r1, path, o2)


def _collapse(node):
    """Drop a unary transformation directly repeated below itself."""
    if not isinstance(node, Transform):
        return node
    inputs = tuple(_collapse(i) for i in node.inputs)
    if (len(inputs) == 1 and isinstance(inputs[0], Transform)
            and inputs[0].function == node.function):
        return inputs[0]
    return Transform(node.function, inputs)


def crossover_transformation(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Two-point crossover on transformation chains.

    Picks an upper and a lower transformation (lower inside upper's subtree)
    in each rule.  ``r1``'s upper..lower segment is replaced by ``r2``'s, whose
    lowest node takes over ``r1``'s lower inputs.  ``r2``'s segment is drawn
    from the same data source side so property leaves keep their side.
    """
    ts1 = _nodes(r1, Transform)
    if not ts1:
        return r1
    up_path1, upper1 = rng.choice(ts1)
    side = _side(upper1)
    ts2 = [(p, n) for p, n in _nodes(r2, Transform) if _side(n) == side]
    if not ts2:
        return r1
    _, lower1 = rng.choice([(p, n) for p, n in walk(upper1) if isinstance(n, Transform)])
    _, upper2 = rng.choice(ts2)
    low_path2, lower2 = rng.choice([(p, n) for p, n in walk(upper2) if isinstance(n, Transform)])
    if len(lower2.inputs) != len(lower1.inputs):
        return r1
    segment = replace_at(upper2, low_path2, Transform(lower2.function, lower1.inputs))
    return _rebuild(r1, up_path1, _collapse(segment))


def crossover_threshold(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Set a comparison threshold of ``r1`` to its mean with one from ``r2``."""
    cmps1 = _nodes(r1, Comparison)
    cmps2 = _nodes(r2, Comparison)
    if not cmps1 or not cmps2:
        return r1
    path, c1 = rng.choice(cmps1)
    _, c2 = rng.choice(cmps2)
    theta = 0.5 * (c1.threshold + c2.threshold)
    return _rebuild(r1, path, Comparison(c1.measure, theta, c1.left, c1.right, c1.weight))


def crossover_weight(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Set an operand weight of ``r1`` to its mean with one from ``r2``."""
    ws1 = [(p, n) for p, n in walk(r1.root) if p and is_similarity_op(n)]
    ws2 = [(p, n) for p, n in walk(r2.root) if p and is_similarity_op(n)]
    if not ws1 or not ws2:
        return r1
    path, n1 = rng.choice(ws1)
    _, n2 = rng.choice(ws2)
    return _rebuild(r1, path, with_weight(n1, 0.5 * (n1.weight + n2.weight)))


def crossover_subtree(r1: LinkageRule, r2: LinkageRule, rng: random.Random) -> LinkageRule:
    """Strongly typed subtree crossover: the usual GP baseline.

    Similarity nodes swap with similarity nodes, value nodes with value nodes
    reading the same source.
    """
    path, n1 = rng.choice(list(walk(r1.root)))
    if is_similarity_op(n1):
        cands = [n for _, n in walk(r2.root) if is_similarity_op(n)]
    else:
        side = _side(n1)
        cands = [n for _, n in walk(r2.root) if not is_similarity_op(n) and _side(n) == side]
    if not cands:
        return r1
    return _rebuild(r1, path, rng.choice(cands))


SPECIALIZED = (
    crossover_function,
    crossover_operators,
    crossover_aggregation,
    crossover_transformation,
    crossover_threshold,
    crossover_weight,
)
SUBTREE = (crossover_subtree,)

OPERATOR_SETS = {"specialized": SPECIALIZED, "subtree": SUBTREE}
