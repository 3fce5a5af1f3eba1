# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled string and geo kernels.  Must stay call-compatible with
``genlink._kernels_py``."""

from libc.math cimport sin, cos, asin, sqrt, fabs, M_PI
from libc.stdlib cimport malloc, free

cdef double EARTH_RADIUS_M = 6371008.8


cdef Py_ssize_t _lev(str a, str b, Py_ssize_t *row):
    cdef Py_ssize_t n = len(a), m = len(b), i, j, prev, cur, cost
    cdef Py_UCS4 ca
    for j in range(m + 1):
        row[j] = j
    for i in range(1, n + 1):
        ca = a[i - 1]
        prev = row[0]
        row[0] = i
        for j in range(1, m + 1):
            cost = 0 if ca == b[j - 1] else 1
            cur = row[j]
            row[j] = min(min(row[j] + 1, row[j - 1] + 1), prev + cost)
            prev = cur
    return row[m]


def levenshtein(str a, str b):
    """Edit distance with unit insert, delete and substitute costs."""
    if len(a) < len(b):
        a, b = b, a
    cdef Py_ssize_t *row = <Py_ssize_t *> malloc((len(b) + 1) * sizeof(Py_ssize_t))
    if row == NULL:
        raise MemoryError()
    try:
        return _lev(a, b, row)
    finally:
        free(row)


def min_levenshtein(list xs, list ys):
    """Smallest edit distance over the cross product; -1 when either is empty."""
    if not xs or not ys:
        return -1
    cdef Py_ssize_t longest = 0, best = -1, d
    cdef str x, y
    for y in ys:
        if len(y) > longest:
            longest = len(y)
    for x in xs:
        if len(x) > longest:
            longest = len(x)
    cdef Py_ssize_t *row = <Py_ssize_t *> malloc((longest + 1) * sizeof(Py_ssize_t))
    if row == NULL:
        raise MemoryError()
    try:
        for x in xs:
            for y in ys:
                # lower bound from the length difference
                if best >= 0 and abs(len(x) - len(y)) >= best:
                    continue
                d = _lev(x, y, row) if len(x) >= len(y) else _lev(y, x, row)
                if best < 0 or d < best:
                    best = d
                    if best == 0:
                        return 0
    finally:
        free(row)
    return best


cdef double _hav(double lat1, double lon1, double lat2, double lon2):
    cdef double to_rad = M_PI / 180.0
    cdef double dlat = (lat2 - lat1) * to_rad
    cdef double dlon = (lon2 - lon1) * to_rad
    cdef double h = sin(dlat / 2) ** 2 + cos(lat1 * to_rad) * cos(lat2 * to_rad) * sin(dlon / 2) ** 2
    if h > 1.0:
        h = 1.0
    return 2.0 * EARTH_RADIUS_M * asin(sqrt(h))


def haversine(double lat1, double lon1, double lat2, double lon2):
    """Great-circle distance in meters between two points given in degrees."""
    return _hav(lat1, lon1, lat2, lon2)


def min_abs_difference(list xs, list ys):
    """Smallest |x - y| over the cross product; -1.0 when either is empty."""
    if not xs or not ys:
        return -1.0
    cdef double best = -1.0, d, x, y
    for x in xs:
        for y in ys:
            d = fabs(x - y)
            if best < 0 or d < best:
                best = d
    return best


def min_haversine(list xs, list ys):
    """Smallest great-circle distance over (lat, lon) pairs; -1.0 when empty."""
    if not xs or not ys:
        return -1.0
    cdef double best = -1.0, d
    for p in xs:
        for q in ys:
            d = _hav(p[0], p[1], q[0], q[1])
            if best < 0 or d < best:
                best = d
    return best
