"""Transformation and distance functions over value sets.

Value sets are ``frozenset`` of strings.  Distances return ``None`` when no
value pair can be compared.
"""
from __future__ import annotations

import math
import re
from datetime import date
from functools import lru_cache
from typing import Optional

from genlink import kernels

ValueSet = frozenset

def lower_case(values: ValueSet) -> ValueSet:
    return frozenset(v.lower() for v in values)


# Decimal numbers stay whole so "52.5200" does not share a token with "52.1".
_TOKEN = re.compile(r"\d+(?:\.\d+)*|[^\W_]+")


def tokenize(values: ValueSet) -> ValueSet:
    """Split on whitespace and punctuation; decimal numbers are one token."""
    return frozenset(t for v in values for t in _TOKEN.findall(v))


def strip_uri_prefix(values: ValueSet) -> ValueSet:
    out = set()
    for v in values:
        cut = max(v.rfind("/"), v.rfind("#"))
        out.add(v[cut + 1:])
    return frozenset(out)


def concatenate(first: ValueSet, second: ValueSet) -> ValueSet:
    return frozenset(f"{a} {b}" for a in first for b in second)


TRANSFORM_FUNCTIONS = {
    "lowerCase": lower_case,
    "tokenize": tokenize,
    "stripUriPrefix": strip_uri_prefix,
    "concatenate": concatenate,
}


def apply_transform(function: str, inputs: list) -> ValueSet:
    return TRANSFORM_FUNCTIONS[function](*inputs)


# -- typed value parsing ------------------------------------------------------

@lru_cache(maxsize=65536)
def parse_number(text: str) -> Optional[float]:
    try:
        x = float(text.strip())
    except ValueError:
        return None
    return x if math.isfinite(x) else None


_COORD_SPLIT = re.compile(r"[\s,;]+")


@lru_cache(maxsize=65536)
def parse_point(text: str) -> Optional[tuple]:
    """``"lat lon"`` (whitespace or comma separated) in degrees."""
    parts = [p for p in _COORD_SPLIT.split(text.strip()) if p]
    if len(parts) != 2:
        return None
    lat, lon = parse_number(parts[0]), parse_number(parts[1])
    if lat is None or lon is None or abs(lat) > 90 or abs(lon) > 180:
        return None
    return (lat, lon)


@lru_cache(maxsize=65536)
def parse_date(text: str) -> Optional[int]:
    """ISO-8601 calendar date (a trailing time part is ignored) as a day ordinal."""
    text = text.strip()
    try:
        return date.fromisoformat(text[:10]).toordinal()
    except ValueError:
        return None


def _parsed(values, parser):
    out = []
    for v in values:
        x = parser(v)
        if x is not None:
            out.append(x)
    return out


# -- distances -----------------------------------------------------------------

def levenshtein_distance(a: ValueSet, b: ValueSet) -> Optional[float]:
    d = kernels.min_levenshtein(list(a), list(b))
    return None if d < 0 else float(d)


def jaccard_distance(a: ValueSet, b: ValueSet) -> Optional[float]:
    union = len(a | b)
    if union == 0:
        return None
    return 1.0 - len(a & b) / union


def numeric_distance(a: ValueSet, b: ValueSet) -> Optional[float]:
    d = kernels.min_abs_difference(_parsed(a, parse_number), _parsed(b, parse_number))
    return None if d < 0 else d


def geographic_distance(a: ValueSet, b: ValueSet) -> Optional[float]:
    d = kernels.min_haversine(_parsed(a, parse_point), _parsed(b, parse_point))
    return None if d < 0 else d


def date_distance(a: ValueSet, b: ValueSet) -> Optional[float]:
    d = kernels.min_abs_difference(
        [float(x) for x in _parsed(a, parse_date)], [float(x) for x in _parsed(b, parse_date)]
    )
    return None if d < 0 else d


DISTANCE_FUNCTIONS = {
    "levenshtein": levenshtein_distance,
    "jaccard": jaccard_distance,
    "numeric": numeric_distance,
    "geographic": geographic_distance,
    "date": date_distance,
}


def distance(measure: str, a: ValueSet, b: ValueSet) -> Optional[float]:
    """Distance between two value sets under ``measure``.

    Levenshtein, numeric, geographic and date take the minimum over all value
    pairs (unparseable values are skipped); jaccard compares the sets as a
    whole.  Returns ``None`` when nothing is comparable.
    """
    try:
        fn = DISTANCE_FUNCTIONS[measure]
    except KeyError:
        raise ValueError(f"unknown distance function {measure!r}") from None
    return fn(a, b)
