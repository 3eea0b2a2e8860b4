"""Independent reference implementations used only by the tests.

GF(4) elements are handled as polynomials a + b*w over GF(2) with
w^2 = w + 1; the integer encoding v <-> (v & 1, v >> 1) matches the
library's {0, 1, w, w^2} = {0, 1, 2, 3}.
"""

import itertools
from functools import lru_cache


def f4_mul(x: int, y: int) -> int:
    a, b = x & 1, x >> 1
    c, d = y & 1, y >> 1
    lo = (a & c) ^ (b & d)
    hi = (a & d) ^ (b & c) ^ (b & d)
    return lo | (hi << 1)


def f4_inv(x: int) -> int:
    for y in range(1, 4):
        if f4_mul(x, y) == 1:
            return y
    raise ZeroDivisionError


def f4_pow(x: int, e: int) -> int:
    r = 1
    for _ in range(e):
        r = f4_mul(r, x)
    return r


def dot(u, v) -> int:
    s = 0
    for a, b in zip(u, v):
        s ^= f4_mul(a, b)
    return s


def proj_points(dim: int, q: int = 4) -> list[tuple[int, ...]]:
    """Normalized representatives, collected by brute force over all vectors."""
    seen = []
    found = set()
    for v in itertools.product(range(q), repeat=dim + 1):
        if not any(v):
            continue
        lead = next(x for x in v if x)
        inv = f4_inv(lead) if q == 4 else 1
        n = tuple(f4_mul(inv, x) for x in v)
        if n not in found:
            found.add(n)
            seen.append(n)
    return seen


def det3(a, b, c) -> int:
    """Determinant of the 3x3 matrix with rows a, b, c (signs vanish in char 2)."""
    terms = [
        (a[0], b[1], c[2]), (a[1], b[2], c[0]), (a[2], b[0], c[1]),
        (a[2], b[1], c[0]), (a[0], b[2], c[1]), (a[1], b[0], c[2]),
    ]
    s = 0
    for x, y, z in terms:
        s ^= f4_mul(f4_mul(x, y), z)
    return s


@lru_cache(maxsize=None)
def plane_caps(max_size: int):
    """All caps of PG(2,4) of size <= max_size and the hyperovals among them,
    by checking every subset; collinearity via 3x3 determinants."""
    pts = proj_points(2)
    n = len(pts)
    coll = set()
    for i, j, k in itertools.combinations(range(n), 3):
        if det3(pts[i], pts[j], pts[k]) == 0:
            coll.add((i, j, k))
    lines = []
    for h in pts:
        lines.append(frozenset(i for i, p in enumerate(pts) if dot(h, p) == 0))
    caps = {}
    quantum = {}
    for size in range(1, max_size + 1):
        found = []
        for sub in itertools.combinations(range(n), size):
            if any(t in coll for t in itertools.combinations(sub, 3)):
                continue
            found.append(sub)
        caps[size] = [frozenset(pts[i] for i in s) for s in found]
        quantum[size] = [frozenset(pts[i] for i in s) for s in found
                         if all(len(line & set(s)) % 2 == size % 2 for line in lines)]
    return caps, quantum


def weight_distribution(columns) -> dict:
    """Codeword weights over every nonzero coefficient vector."""
    k = len(columns[0])
    out = {}
    for x in itertools.product(range(4), repeat=k):
        if not any(x):
            continue
        w = sum(1 for col in columns if dot(x, col))
        out[w] = out.get(w, 0) + 1
    return out


def gf2_subspaces_codim2(m: int) -> list[frozenset]:
    """Point sets of all codimension-2 subspaces of PG(m-1, 2), deduplicated."""
    pts = range(1, 1 << m)
    par = lambda x: bin(x).count("1") & 1
    subs = set()
    for f1 in range(1, 1 << m):
        for f2 in range(f1 + 1, 1 << m):
            subs.add(frozenset(p for p in pts if par(p & f1) == 0 and par(p & f2) == 0))
    return list(subs)
