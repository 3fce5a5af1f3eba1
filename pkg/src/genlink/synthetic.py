"""Synthetic benchmark data sets with a known correct rule.

``case-noise``  names that differ between sources only by letter case; hard
                negatives are near-identical names, so a rule must lower-case
                both sides before comparing.
``movies``      titles shared by remakes from different years; a rule needs
                title AND release date.
``persons``     lower-case first and last name in one source, a title-case
                "first middle last" name in the other; hard negatives share a
                first or a last name, so a rule must tokenize, lower-case and
                check both parts.
``wide``        22 properties of which only ``name`` and ``code`` carry
                signal; the rest are independent random strings.
"""
from __future__ import annotations

import random

from genlink.data import Dataset, Entity, EntitySource, ReferenceLinkSet, generate_negative_links

_ONSETS = ["b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z",
           "br", "ch", "cl", "dr", "gr", "kr", "pl", "sh", "st", "tr"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ea", "ou"]


def _word(rng, syllables):
    return "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(syllables))


def _unique(rng, make, n):
    seen = {}
    while len(seen) < n:
        seen[make()] = None
    return list(seen)


def _source(label, rows):
    return EntitySource(label, {
        eid: Entity(eid, {k: frozenset([v]) for k, v in props.items() if v}, label)
        for eid, props in rows
    })


def _case_noise(rng, text):
    """Flip the case of about half the letters, at least two of them."""
    letters = [i for i, c in enumerate(text) if c.isalpha()]
    flips = set(i for i in letters if rng.random() < 0.5)
    while len(flips) < min(2, len(letters)):
        flips.add(rng.choice(letters))
    return "".join(c.swapcase() if i in flips else c for i, c in enumerate(text))


def _variant(rng, text):
    """Substitute one letter so the lower-cased strings differ by one edit."""
    letters = [i for i, c in enumerate(text) if c.isalpha()]
    i = rng.choice(letters)
    old = text[i].lower()
    new = rng.choice([c for c in "abcdefghijklmnopqrstuvwxyz" if c != old])
    if text[i].isupper():
        new = new.upper()
    return text[:i] + new + text[i + 1:]


def case_noise(seed: int = 0, families: int = 40) -> Dataset:
    rng = random.Random(seed)
    bases = _unique(rng, lambda: f"{_word(rng, 2).title()} {_word(rng, 3).title()}", families)
    taken = {b.lower() for b in bases}
    names = []
    for base in bases:
        other = _variant(rng, base)
        while other.lower() in taken:
            other = _variant(rng, base)
        taken.add(other.lower())
        names.append((base, other))
    rows_a, rows_b, pos, neg = [], [], [], []
    for k, (n1, n2) in enumerate(names):
        ids = []
        for j, name in enumerate((n1, n2)):
            a, b = f"a{k}_{j}", f"b{k}_{j}"
            rows_a.append((a, {"name": _case_noise(rng, name)}))
            rows_b.append((b, {"name": _case_noise(rng, name)}))
            pos.append((a, b))
            ids.append((a, b))
        (a1, b1), (a2, b2) = ids
        neg += [(a1, b2), (a2, b1)]
    return Dataset("case-noise", _source("A", rows_a), _source("B", rows_b),
                   ReferenceLinkSet(pos, neg))


def movies(seed: int = 0, titles: int = 50, dates: int = 12) -> Dataset:
    rng = random.Random(seed)
    names = _unique(rng, lambda: " ".join(_word(rng, rng.randint(1, 3)).title()
                                          for _ in range(rng.randint(1, 3))), titles)
    days = _unique(rng, lambda: f"{rng.randint(1950, 2019)}-{rng.randint(1, 12):02d}-"
                                f"{rng.randint(1, 28):02d}", dates)
    rows_a, rows_b, pos, remakes = [], [], [], []
    by_day: dict = {}
    for k, title in enumerate(names):
        # every title has an original and a remake released on another day
        ids = []
        for j, day in enumerate(rng.sample(days, 2)):
            a, b = f"m{k}_{j}", f"film{k}_{j}"
            rows_a.append((a, {"title": title, "date": day,
                               "genre": rng.choice(["drama", "comedy", "action"])}))
            rows_b.append((b, {"label": title, "released": day}))
            pos.append((a, b))
            ids.append((a, b))
            by_day.setdefault(day, []).append((k, a, b))
        (a1, b1), (a2, b2) = ids
        remakes += [(a1, b2), (a2, b1)]
    same_day = [(a1, b2) for group in by_day.values()
                for k1, a1, _ in group for k2, _, b2 in group if k1 != k2]
    rng.shuffle(remakes)
    rng.shuffle(same_day)
    half = len(pos) // 2
    neg = remakes[:half] + same_day[: len(pos) - half]
    return Dataset("movies", _source("A", rows_a), _source("B", rows_b),
                   ReferenceLinkSet(pos, neg))


def persons(seed: int = 0, people: int = 60) -> Dataset:
    rng = random.Random(seed)
    firsts = _unique(rng, lambda: _word(rng, 2), people // 4)
    lasts = []
    for base in _unique(rng, lambda: _word(rng, 3), people // 8):
        lasts += [base, _variant(rng, base)]
    combos = _unique(rng, lambda: (rng.choice(firsts), rng.choice(lasts)), people)
    rows_a, rows_b, pos = [], [], []
    for k, (first, last) in enumerate(combos):
        middle = _word(rng, rng.randint(1, 2))
        rows_a.append((f"p{k}", {"firstName": first, "lastName": last}))
        rows_b.append((f"q{k}", {"name": f"{first} {middle} {last}".title()}))
        pos.append((f"p{k}", f"q{k}"))
    hard = [(f"p{i}", f"q{j}") for i, ci in enumerate(combos) for j, cj in enumerate(combos)
            if i != j and (ci[0] == cj[0] or ci[1] == cj[1])]
    rng.shuffle(hard)
    return Dataset("persons", _source("A", rows_a), _source("B", rows_b),
                   ReferenceLinkSet(pos, hard[: len(pos)]))


def wide(seed: int = 0, entities: int = 60, noise_properties: int = 20) -> Dataset:
    rng = random.Random(seed)
    names = _unique(rng, lambda: f"{_word(rng, 2)} {_word(rng, 2)}", entities)
    noise = [f"p{i:02d}" for i in range(noise_properties)]
    rows_a, rows_b, pos = [], [], []
    for k, name in enumerate(names):
        code = f"{rng.randrange(10**6):06d}"
        props_a = {"name": name, "code": code}
        props_b = {"name": name, "code": code}
        for p in noise:
            props_a[p] = _word(rng, 4)
            props_b[p] = _word(rng, 4)
        rows_a.append((f"x{k}", props_a))
        rows_b.append((f"y{k}", props_b))
        pos.append((f"x{k}", f"y{k}"))
    neg = generate_negative_links(pos, random.Random(seed + 1))
    return Dataset("wide", _source("A", rows_a), _source("B", rows_b), ReferenceLinkSet(pos, neg))


SUITE = {"case-noise": case_noise, "movies": movies, "persons": persons, "wide": wide}


def load_synthetic(name: str, seed: int = 0) -> Dataset:
    try:
        return SUITE[name](seed)
    except KeyError:
        raise ValueError(f"unknown synthetic data set {name!r}; choose from {sorted(SUITE)}") from None
