"""Linkage rule trees: node types, typing checks, operator counting and the
``genlink-rule v1`` text format.

A rule is an immutable tree.  Value operators (:class:`Property`,
:class:`Transform`) produce value sets for a single entity; similarity
operators (:class:`Comparison`, :class:`Aggregation`) score an entity pair.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

SOURCES = ("A", "B")
TRANSFORMS = {"lowerCase": 1, "tokenize": 1, "stripUriPrefix": 1, "concatenate": 2}
MEASURES = ("levenshtein", "jaccard", "numeric", "geographic", "date")
AGGREGATIONS = ("max", "min", "wmean")

FORMAT_HEADER = "genlink-rule v1"


class _Node:
    # Hashing a deep frozen dataclass walks the whole tree; rules are used as
    # cache keys on every fitness evaluation, so memoize the hash.
    def __hash__(self) -> int:
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((type(self).__name__,) + self._key())
            self.__dict__["_hash"] = h
            return h


@dataclass(frozen=True, eq=True)
class Property(_Node):
    source: str
    name: str

    def _key(self):
        return (self.source, self.name)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Transform(_Node):
    function: str
    inputs: tuple

    def _key(self):
        return (self.function, self.inputs)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Comparison(_Node):
    measure: str
    threshold: float
    left: "ValueOp"
    right: "ValueOp"
    weight: float = 1.0

    def _key(self):
        return (self.measure, self.threshold, self.left, self.right, self.weight)

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Aggregation(_Node):
    function: str
    operands: tuple
    weight: float = 1.0

    def _key(self):
        return (self.function, self.operands, self.weight)

    @property
    def weights(self) -> tuple:
        return tuple(op.weight for op in self.operands)

    __hash__ = _Node.__hash__


ValueOp = Union[Property, Transform]
SimilarityOp = Union[Comparison, Aggregation]
Node = Union[Property, Transform, Comparison, Aggregation]


@dataclass(frozen=True)
class LinkageRule:
    root: SimilarityOp

    def __hash__(self) -> int:
        return hash(self.root)


def aggregate(function: str, operands, weights=None, weight: float = 1.0) -> Aggregation:
    """Build an aggregation, optionally assigning per-operand weights."""
    operands = tuple(operands)
    if weights is not None:
        if len(weights) != len(operands):
            raise ValueError("weights and operands differ in length")
        operands = tuple(with_weight(op, w) for op, w in zip(operands, weights))
    return Aggregation(function, operands, weight)


def with_weight(node: SimilarityOp, weight: float) -> SimilarityOp:
    if node.weight == weight:
        return node
    if isinstance(node, Comparison):
        return Comparison(node.measure, node.threshold, node.left, node.right, weight)
    return Aggregation(node.function, node.operands, weight)


# ---------------------------------------------------------------------------
# Tree navigation.  A path is a tuple of child indices from the root.

def children(node: Node) -> tuple:
    if isinstance(node, Aggregation):
        return node.operands
    if isinstance(node, Comparison):
        return (node.left, node.right)
    if isinstance(node, Transform):
        return node.inputs
    return ()


def with_children(node: Node, kids) -> Node:
    kids = tuple(kids)
    if isinstance(node, Aggregation):
        return Aggregation(node.function, kids, node.weight)
    if isinstance(node, Comparison):
        left, right = kids
        return Comparison(node.measure, node.threshold, left, right, node.weight)
    if isinstance(node, Transform):
        return Transform(node.function, kids)
    if kids:
        raise ValueError("property operators have no children")
    return node


def walk(node: Node, path: tuple = ()) -> Iterator[tuple[tuple, Node]]:
    """Yield ``(path, node)`` in pre-order."""
    yield path, node
    for i, child in enumerate(children(node)):
        yield from walk(child, path + (i,))


def node_at(node: Node, path: tuple) -> Node:
    for i in path:
        node = children(node)[i]
    return node


def replace_at(node: Node, path: tuple, new: Node) -> Node:
    if not path:
        return new
    kids = list(children(node))
    kids[path[0]] = replace_at(kids[path[0]], path[1:], new)
    return with_children(node, kids)


def is_value_op(node) -> bool:
    return isinstance(node, (Property, Transform))


def is_similarity_op(node) -> bool:
    return isinstance(node, (Comparison, Aggregation))


def properties(node: Node) -> list[Property]:
    return [n for _, n in walk(node) if isinstance(n, Property)]


def count_operators(rule: LinkageRule) -> int:
    """Number of nodes of every kind reachable from the root."""
    return sum(1 for _ in walk(rule.root))


# ---------------------------------------------------------------------------
# Validation

@dataclass
class ValidationReport:
    violations: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, path: tuple, message: str) -> None:
        self.violations.append(("/" + "/".join(map(str, path)), message))

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{p}: {m}" for p, m in self.violations)


def validate(rule) -> ValidationReport:
    """Check every node of ``rule`` against the typing grammar.

    Violations are collected, not raised; each carries the path of the
    offending node.
    """
    report = ValidationReport()
    root = rule.root if isinstance(rule, LinkageRule) else rule
    if not is_similarity_op(root):
        report.add((), "root must be a comparison or aggregation")
        _check_value(root, (), None, report)
        return report
    _check_similarity(root, (), report)
    return report


def _check_weight(node, path, report):
    w = node.weight
    if not (isinstance(w, (int, float)) and math.isfinite(w) and w > 0):
        report.add(path, "weight must be a positive real")


def _check_similarity(node, path, report):
    if isinstance(node, Aggregation):
        if node.function not in AGGREGATIONS:
            report.add(path, f"unknown aggregation function {node.function!r}")
        if not node.operands:
            report.add(path, "aggregation requires at least one operand")
        _check_weight(node, path, report)
        for i, op in enumerate(node.operands):
            if is_similarity_op(op):
                _check_similarity(op, path + (i,), report)
            else:
                report.add(path + (i,), "aggregation operands must be similarity operators")
    elif isinstance(node, Comparison):
        if node.measure not in MEASURES:
            report.add(path, f"unknown distance function {node.measure!r}")
        t = node.threshold
        if not (isinstance(t, (int, float)) and math.isfinite(t) and t >= 0):
            report.add(path, "threshold must be non-negative")
        _check_weight(node, path, report)
        sides = (node.left, node.right)
        if any(s is None for s in sides):
            report.add(path, "comparison requires two value operators")
        for i, (side, src) in enumerate(zip(sides, SOURCES)):
            if side is not None:
                _check_value(side, path + (i,), src, report)
    else:
        report.add(path, "expected a similarity operator")


def _check_value(node, path, source, report):
    if isinstance(node, Property):
        if node.source not in SOURCES:
            report.add(path, f"unknown source {node.source!r}")
        elif source is not None and node.source != source:
            report.add(path, f"property reads source {node.source} on the {source} side")
        if not node.name:
            report.add(path, "property name must be non-empty")
    elif isinstance(node, Transform):
        arity = TRANSFORMS.get(node.function)
        if arity is None:
            report.add(path, f"unknown transformation function {node.function!r}")
        elif len(node.inputs) != arity:
            if node.function == "concatenate":
                report.add(path, "concatenate requires exactly 2 inputs")
            else:
                report.add(path, f"{node.function} requires exactly 1 input")
        for i, child in enumerate(node.inputs):
            _check_value(child, path + (i,), source, report)
    else:
        report.add(path, "expected a value operator")


# ---------------------------------------------------------------------------
# Text format
#
#   genlink-rule v1
#   aggregate(fn=min, weights=[1, 1]) {
#     compare(measure=levenshtein, threshold=1, weight=1) {
#       left { transform(fn=lowerCase) { property(source=A, name=label) } }
#       right { ... }
#     }
#   }

def _num(x: float) -> str:
    return repr(float(x))


def _quote(name: str) -> str:
    if re.fullmatch(r"[A-Za-z_][\w.:\-]*", name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def serialize(rule: LinkageRule) -> str:
    lines = [FORMAT_HEADER]
    _emit(rule.root, 0, lines)
    return "\n".join(lines) + "\n"


def _emit(node, depth, lines):
    pad = "  " * depth
    if isinstance(node, Aggregation):
        ws = ", ".join(_num(w) for w in node.weights)
        lines.append(f"{pad}aggregate(fn={node.function}, weights=[{ws}], "
                     f"weight={_num(node.weight)}) {{")
        for op in node.operands:
            _emit(op, depth + 1, lines)
        lines.append(pad + "}")
    elif isinstance(node, Comparison):
        lines.append(
            f"{pad}compare(measure={node.measure}, threshold={_num(node.threshold)}, "
            f"weight={_num(node.weight)}) {{"
        )
        for label, side in (("left", node.left), ("right", node.right)):
            lines.append(f"{pad}  {label} {{")
            _emit(side, depth + 2, lines)
            lines.append(f"{pad}  }}")
        lines.append(pad + "}")
    elif isinstance(node, Transform):
        lines.append(f"{pad}transform(fn={node.function}) {{")
        for child in node.inputs:
            _emit(child, depth + 1, lines)
        lines.append(pad + "}")
    else:
        lines.append(f"{pad}property(source={node.source}, name={_quote(node.name)})")


class RuleParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<punct>[(){}\[\],=])
  | (?P<word>[^\s(){}\[\],="]+)
    """,
    re.VERBOSE,
)

_KEYS = {
    "aggregate": {"fn", "weights", "weight"},
    "compare": {"measure", "threshold", "weight"},
    "transform": {"fn"},
    "property": {"source", "name"},
}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:  # pragma: no cover - the word class matches anything else
                self.fail("unexpected character", pos)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.i = 0

    def fail(self, message, pos=None):
        if pos is None:
            pos = self.tokens[self.i][2] if self.i < len(self.tokens) else len(self.text)
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        raise RuleParseError(message, line, col)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self, value=None, kind=None):
        tok = self.peek()
        if tok[0] is None:
            self.fail("unexpected end of input")
        if value is not None and tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1]!r}")
        if kind is not None and tok[0] != kind:
            self.fail(f"expected {kind}, found {tok[1]!r}")
        self.i += 1
        return tok

    def scalar(self):
        kind, text, pos = self.take()
        if kind == "str":
            return re.sub(r"\\(.)", r"\1", text[1:-1]), pos
        if kind != "word":
            self.fail(f"expected a value, found {text!r}", pos)
        return text, pos

    def number(self):
        text, pos = self.scalar()
        try:
            value = float(text)
        except ValueError:
            self.fail(f"expected a number, found {text!r}", pos)
        if not math.isfinite(value):
            self.fail("numbers must be finite", pos)
        return value, pos

    def attrs(self, kind):
        self.take("(")
        out = {}
        while self.peek()[1] != ")":
            key, pos = self.take(kind="word")[1:]
            if key not in _KEYS[kind]:
                self.fail(f"unknown key {key!r} for {kind}", pos)
            if key in out:
                self.fail(f"duplicate key {key!r}", pos)
            self.take("=")
            if key == "weights":
                self.take("[")
                ws = []
                while self.peek()[1] != "]":
                    ws.append(self.number())
                    if self.peek()[1] == ",":
                        self.take(",")
                self.take("]")
                out[key] = (ws, pos)
            elif key in ("threshold", "weight"):
                out[key] = self.number()
            else:
                out[key] = self.scalar()
            if self.peek()[1] == ",":
                self.take(",")
        self.take(")")
        missing = _KEYS[kind] - set(out) - {"weight"}
        if missing:
            self.fail(f"{kind} is missing {', '.join(sorted(missing))}")
        return out

    def _weight(self, own, enclosing) -> float:
        """Resolve a node's ``weight=`` against its parent's weights list."""
        if own is not None and enclosing is not None and own[0] != enclosing[0]:
            self.fail("weight disagrees with the enclosing weights list", own[1])
        w = enclosing if enclosing is not None else own
        if w is None:
            return 1.0
        if not (math.isfinite(w[0]) and w[0] > 0):
            self.fail("weight must be a positive real", w[1])
        return w[0]

    def similarity(self, weight=None):
        kind, word, pos = self.take(kind="word")
        if word == "aggregate":
            a = self.attrs("aggregate")
            fn, fpos = a["fn"]
            if fn not in AGGREGATIONS:
                self.fail("unknown aggregation function", fpos)
            ws, wpos = a["weights"]
            self.take("{")
            ops = []
            while self.peek()[1] != "}":
                if len(ops) >= len(ws):
                    self.fail("more operands than weights", wpos)
                ops.append(self.similarity(ws[len(ops)]))
            self.take("}")
            if not ops:
                self.fail("aggregation requires at least one operand", pos)
            if len(ops) != len(ws):
                self.fail("weights and operands differ in length", wpos)
            w = self._weight(a.get("weight"), weight)
            return Aggregation(fn, tuple(ops), w)
        if word == "compare":
            a = self.attrs("compare")
            measure, mpos = a["measure"]
            if measure not in MEASURES:
                self.fail("unknown distance function", mpos)
            theta, tpos = a["threshold"]
            if theta < 0:
                self.fail("threshold must be non-negative", tpos)
            w = self._weight(a.get("weight"), weight)
            self.take("{")
            self.take("left")
            left = self.block("A")
            self.take("right")
            right = self.block("B")
            self.take("}")
            return Comparison(measure, theta, left, right, w)
        self.fail(f"expected aggregate or compare, found {word!r}", pos)

    def block(self, source):
        self.take("{")
        node = self.value(source)
        self.take("}")
        return node

    def value(self, source):
        kind, word, pos = self.take(kind="word")
        if word == "property":
            a = self.attrs("property")
            src, spos = a["source"]
            if src not in SOURCES:
                self.fail("source must be A or B", spos)
            if src != source:
                self.fail(f"property reads source {src} on the {source} side", spos)
            name, npos = a["name"]
            if not name:
                self.fail("property name must be non-empty", npos)
            return Property(src, name)
        if word == "transform":
            a = self.attrs("transform")
            fn, fpos = a["fn"]
            if fn not in TRANSFORMS:
                self.fail("unknown transformation function", fpos)
            self.take("{")
            inputs = []
            while self.peek()[1] != "}":
                inputs.append(self.value(source))
            self.take("}")
            if len(inputs) != TRANSFORMS[fn]:
                if fn == "concatenate":
                    self.fail("concatenate requires exactly 2 inputs", fpos)
                self.fail(f"{fn} requires exactly 1 input", fpos)
            return Transform(fn, tuple(inputs))
        self.fail(f"expected property or transform, found {word!r}", pos)


def parse(text: str) -> LinkageRule:
    """Parse a ``genlink-rule v1`` document.

    Raises :class:`RuleParseError` with line and column on malformed input,
    unknown keys or functions, and grammar violations.
    """
    body = text.lstrip()
    if not body.startswith(FORMAT_HEADER):
        raise RuleParseError(f"missing header {FORMAT_HEADER!r}", 1, 1)
    offset = len(text) - len(body) + len(FORMAT_HEADER)
    p = _Parser(text)
    # skip header tokens
    while p.i < len(p.tokens) and p.tokens[p.i][2] < offset:
        p.i += 1
    root = p.similarity()
    if p.i != len(p.tokens):
        p.fail("trailing content after rule")
    return LinkageRule(root)
