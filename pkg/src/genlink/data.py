"""Entity sources, reference links, negative-link generation and folds."""
from __future__ import annotations

import csv
import io
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class DataError(ValueError):
    """Malformed or inconsistent input data."""


@dataclass(frozen=True)
class Entity:
    id: str
    properties: dict  # name -> frozenset of str
    source: str = "A"

    def __hash__(self):
        return hash((self.source, self.id))


@dataclass
class EntitySource:
    label: str
    entities: dict = field(default_factory=dict)  # id -> Entity

    @property
    def property_names(self) -> list[str]:
        names = {}
        for e in self.entities.values():
            names.update(dict.fromkeys(e.properties))
        return sorted(names)

    def __getitem__(self, entity_id: str) -> Entity:
        return self.entities[entity_id]

    def __contains__(self, entity_id: str) -> bool:
        return entity_id in self.entities

    def __len__(self) -> int:
        return len(self.entities)

    def relabel(self, label: str) -> "EntitySource":
        return EntitySource(
            label, {k: Entity(e.id, e.properties, label) for k, e in self.entities.items()}
        )


@dataclass
class ReferenceLinkSet:
    positive: list = field(default_factory=list)  # [(id_a, id_b)]
    negative: list = field(default_factory=list)

    def __post_init__(self):
        self.positive = [tuple(p) for p in self.positive]
        self.negative = [tuple(p) for p in self.negative]
        clash = set(self.positive) & set(self.negative)
        if clash:
            raise DataError(f"links are both positive and negative: {sorted(clash)[:3]}")

    def labelled(self) -> list[tuple[tuple, bool]]:
        return [(p, True) for p in self.positive] + [(p, False) for p in self.negative]

    def __len__(self) -> int:
        return len(self.positive) + len(self.negative)


@dataclass
class Dataset:
    name: str
    source_a: EntitySource
    source_b: EntitySource
    links: ReferenceLinkSet

    def pair(self, link: tuple) -> tuple:
        a, b = link
        return self.source_a.entities.get(a), self.source_b.entities.get(b)


def _builder(label):
    props: dict = {}

    def add(entity_id, name=None, value=None):
        values = props.setdefault(entity_id, {})
        if name is not None:
            values.setdefault(name, {})[value] = None

    def build():
        ents = {
            eid: Entity(eid, {k: frozenset(v) for k, v in p.items()}, label)
            for eid, p in props.items()
        }
        return EntitySource(label, ents)

    return add, build


def load_entities(path, format: str = "csv", label: str = "A") -> EntitySource:
    """Load an entity source from CSV (header with an ``id`` column) or from
    a flat N-Triples file (subject = entity, predicate = property)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if format == "csv":
        return _load_csv(text, label, path)
    if format == "ntriples":
        return _load_ntriples(text, label, path)
    raise DataError(f"unknown format {format!r}")


def _load_csv(text, label, path):
    add, build = _builder(label)
    rows = csv.reader(io.StringIO(text, newline=""))
    header = next(rows, None)
    if header is None:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in header]
    if "id" not in header:
        raise DataError(f"{path}: no id column")
    id_col = header.index("id")
    if len(set(header)) != len(header):
        raise DataError(f"{path}: duplicate column names")
    for row in rows:
        lineno = rows.line_num
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
        eid = row[id_col].strip()
        if not eid:
            raise DataError(f"{path}:{lineno}: empty id")
        add(eid)
        for name, value in zip(header, row):
            if name != "id" and name and value != "":
                add(eid, name, value)
    return build()


_IRI = r"<([^>]*)>"
_BNODE = r"(_:[A-Za-z0-9_.\-]+)"
_LITERAL = r'"((?:[^"\\]|\\.)*)"(?:@[A-Za-z0-9\-]+|\^\^<[^>]*>)?'
_TRIPLE = re.compile(
    rf"^\s*(?:{_IRI}|{_BNODE})\s+{_IRI}\s+(?:{_IRI}|{_BNODE}|{_LITERAL})\s*\.\s*$"
)
_ESCAPE = re.compile(r"\\(u[0-9A-Fa-f]{4}|U[0-9A-Fa-f]{8}|.)")
_SIMPLE_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def _unescape(s: str) -> str:
    def sub(m):
        code = m.group(1)
        if code[0] in "uU" and len(code) > 1:
            return chr(int(code[1:], 16))
        if code in _SIMPLE_ESCAPES:
            return _SIMPLE_ESCAPES[code]
        raise ValueError(f"bad escape \\{code}")

    return _ESCAPE.sub(sub, s)


def _load_ntriples(text, label, path):
    add, build = _builder(label)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        m = _TRIPLE.match(line)
        if m is None:
            raise DataError(f"{path}:{lineno}: malformed triple")
        s_iri, s_bnode, pred, o_iri, o_bnode, literal = m.groups()
        subject = s_iri if s_iri is not None else s_bnode
        if literal is not None:
            try:
                value = _unescape(literal)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
        else:
            value = o_iri if o_iri is not None else o_bnode
        if not pred:
            raise DataError(f"{path}:{lineno}: empty predicate")
        add(subject, pred, value)
    return build()


def load_links(path, source_a: Optional[EntitySource] = None,
               source_b: Optional[EntitySource] = None) -> list[tuple[str, str, str]]:
    """Read ``source_id,target_id[,label]`` rows; label is ``+`` (default) or ``-``.

    A header row is recognised by its first cell being ``source_id``.  A
    ``score`` third column (as written by matching) marks every row positive.
    When sources are given, every id must resolve in its source.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    out, seen = [], set()
    scored = False
    reader = csv.reader(io.StringIO(text, newline=""))
    for row in reader:
        lineno = reader.line_num
        if not row or not any(c.strip() for c in row):
            continue
        if lineno == 1 and row[0].strip() == "source_id":
            scored = len(row) == 3 and row[2].strip() == "score"
            continue
        if len(row) not in (2, 3):
            raise DataError(f"{path}:{lineno}: expected 2 or 3 fields")
        a, b = row[0].strip(), row[1].strip()
        lab = row[2].strip() if len(row) == 3 and not scored else "+"
        if lab in ("", "1", "true"):
            lab = "+"
        elif lab in ("0", "false"):
            lab = "-"
        if lab not in ("+", "-"):
            raise DataError(f"{path}:{lineno}: label must be + or -, found {lab!r}")
        if (a, b) in seen:
            raise DataError(f"{path}:{lineno}: duplicate link ({a}, {b})")
        seen.add((a, b))
        if source_a is not None and a not in source_a:
            raise DataError(f"{path}:{lineno}: unknown source id {a!r}")
        if source_b is not None and b not in source_b:
            raise DataError(f"{path}:{lineno}: unknown target id {b!r}")
        out.append((a, b, lab))
    return out


def generate_negative_links(positive, rng: Optional[random.Random] = None) -> list[tuple]:
    """Derive negatives by crossing consecutive positive links.

    Links are shuffled with ``rng`` (kept in order when ``rng`` is None), then
    each consecutive pair ``(a, b), (c, d)`` yields ``(a, d)`` and ``(c, b)``.
    With an odd count the last link is crossed with the first, emitting only
    ``(last_a, first_b)``.  Pairs that are themselves positive and repeats are
    dropped.
    """
    links = [tuple(p) for p in positive]
    if len(links) < 2:
        raise DataError("cannot derive negatives from fewer than 2 positive links")
    if rng is not None:
        rng.shuffle(links)
    out = []
    for i in range(0, len(links) - 1, 2):
        (a, b), (c, d) = links[i], links[i + 1]
        out += [(a, d), (c, b)]
    if len(links) % 2:
        out.append((links[-1][0], links[0][1]))
    pos = set(links)
    return [p for p in dict.fromkeys(out) if p not in pos]


def _chunks(items, k):
    n, extra = divmod(len(items), k)
    out, start = [], 0
    for i in range(k):
        end = start + n + (1 if i < extra else 0)
        out.append(items[start:end])
        start = end
    return out


def split_folds(links: ReferenceLinkSet, k: int, rng: random.Random) -> list[ReferenceLinkSet]:
    """Stratified split into ``k`` disjoint folds of near-equal size."""
    if k < 2:
        raise DataError("need at least 2 folds")
    if len(links.positive) < k or len(links.negative) < k:
        raise DataError(f"too few links for {k} folds")
    pos, neg = list(links.positive), list(links.negative)
    rng.shuffle(pos)
    rng.shuffle(neg)
    return [ReferenceLinkSet(p, n) for p, n in zip(_chunks(pos, k), _chunks(neg, k))]


def merge(folds) -> ReferenceLinkSet:
    return ReferenceLinkSet(
        [p for f in folds for p in f.positive], [n for f in folds for n in f.negative]
    )


def load_dataset(source_a, links, source_b=None, format: str = "csv",
                 name: Optional[str] = None, seed: int = 0) -> Dataset:
    """Load sources and links; generate negatives if the file has none.

    Without ``source_b`` the data set is matched against itself.
    """
    a = load_entities(source_a, format, "A")
    b = load_entities(source_b, format, "B") if source_b is not None else a.relabel("B")
    rows = load_links(links, a, b)
    pos = [(x, y) for x, y, lab in rows if lab == "+"]
    neg = [(x, y) for x, y, lab in rows if lab == "-"]
    if not neg:
        neg = generate_negative_links(pos, random.Random(seed))
    return Dataset(name or Path(source_a).stem, a, b, ReferenceLinkSet(pos, neg))


def write_entities(source: EntitySource, path) -> None:
    names = source.property_names
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id"] + names)
        for e in source.entities.values():
            values = [sorted(e.properties.get(n, ())) for n in names]
            depth = max([len(v) for v in values] + [1])
            for i in range(depth):
                w.writerow([e.id] + [v[i] if i < len(v) else "" for v in values])


def write_links(links: ReferenceLinkSet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["source_id", "target_id", "label"])
        for (a, b), lab in links.labelled():
            w.writerow([a, b, "+" if lab else "-"])
