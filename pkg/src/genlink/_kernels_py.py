"""Pure-Python kernels; used when the compiled extension is unavailable."""
import math

EARTH_RADIUS_M = 6371008.8


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    row = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        prev, row[0] = row[0], i
        for j, cb in enumerate(b, 1):
            cur = row[j]
            row[j] = min(row[j] + 1, row[j - 1] + 1, prev + (ca != cb))
            prev = cur
    return row[-1]


def min_levenshtein(xs: list, ys: list) -> int:
    if not xs or not ys:
        return -1
    best = -1
    for x in xs:
        for y in ys:
            if best >= 0 and abs(len(x) - len(y)) >= best:
                continue
            d = levenshtein(x, y)
            if best < 0 or d < best:
                best = d
                if best == 0:
                    return 0
    return best


def haversine(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dlat = p2 - p1
    dlon = math.radians(lon2 - lon1)
    h = math.sin(dlat / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dlon / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(min(h, 1.0)))


def min_abs_difference(xs: list, ys: list) -> float:
    if not xs or not ys:
        return -1.0
    return float(min(abs(x - y) for x in xs for y in ys))


def min_haversine(xs: list, ys: list) -> float:
    if not xs or not ys:
        return -1.0
    return min(haversine(p[0], p[1], q[0], q[1]) for p in xs for q in ys)
