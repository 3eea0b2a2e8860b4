"""Binary side of the quantum-code dictionary.

Pauli operators become bit pairs (X -> 10, Y -> 11, Z -> 01, I -> 00) and
commute exactly when the symplectic product of their pairs vanishes.  A
GF(4)-linear cap code expands to a binary stabilizer matrix by writing each
entry a + w*b as the pair (a, b) and each row v as the two rows v and w*v.
Column k of that matrix gives a pair of points (P_k, Q_k) of PG(m-1, 2)
spanning a codeline; the code is self-orthogonal iff every codimension-2
subspace (secundum) is skew to an even number of codelines.

Binary points and linear functionals on GF(2)^m are stored as m-bit ints,
bit j holding coordinate j.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import geometry as gf
from .caps import PointSet

PAULI = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


class DegenerateLineError(ValueError):
    pass


def pauli_translate(symbol: str) -> tuple[int, int]:
    try:
        return PAULI[symbol.upper()]
    except (KeyError, AttributeError):
        raise ValueError(f"unknown Pauli symbol {symbol!r}") from None


def translate_string(paulis: str) -> np.ndarray:
    """'XZI' -> BinaryWord of shape (3, 2)."""
    return np.array([pauli_translate(s) for s in paulis], dtype=np.uint8).reshape(-1, 2)


def symplectic_product(u: np.ndarray, v: np.ndarray) -> int:
    """sum_i x_{1,i} y_{2,i} + y_{1,i} x_{2,i} over GF(2); words have shape (n, 2)."""
    u = np.asarray(u, dtype=np.uint8).reshape(-1, 2)
    v = np.asarray(v, dtype=np.uint8).reshape(-1, 2)
    if u.shape != v.shape:
        raise ValueError(f"length mismatch: {len(u)} vs {len(v)}")
    return int((np.sum(u[:, 0] & v[:, 1]) + np.sum(u[:, 1] & v[:, 0])) % 2)


def symplectic_self_orthogonal(rows: Sequence[np.ndarray]) -> bool:
    if len(rows) == 0:
        return True
    m = np.asarray(rows, dtype=np.int64)  # (r, n, 2)
    x, y = m[:, :, 0], m[:, :, 1]
    gram = (x @ y.T + y @ x.T) % 2
    return not gram.any()


@dataclass(frozen=True)
class BinaryCodeLines:
    m: int
    p: tuple[int, ...]
    q: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.p)

    def degenerate(self) -> list[int]:
        """Indices of sections whose pair does not span a line."""
        return [k for k, (a, b) in enumerate(zip(self.p, self.q)) if a == 0 or b == 0 or a == b]


def expand_to_binary(ps: PointSet, require_spanning: bool = True) -> tuple[list[np.ndarray], BinaryCodeLines]:
    """Binary generator rows (v_1, w v_1, ..., v_r, w v_r) and the codelines."""
    if ps.space.q != 4:
        raise ValueError("binary expansion needs a cap over GF(4)")
    g = ps.matrix()
    r = g.shape[0]
    if require_spanning and gf.rank(g) < r:
        raise ValueError(f"matrix rank {gf.rank(g)} < {r}: expansion needs a spanning point set")
    rows = []
    for i in range(r):
        for scale in (1, gf.W):
            v = gf.MUL[scale][g[i]]
            rows.append(np.stack([v & 1, v >> 1], axis=1).astype(np.uint8))
    m = 2 * r
    p, q = [], []
    for k in range(g.shape[1]):
        pk = qk = 0
        for j, row in enumerate(rows):
            pk |= int(row[k, 0]) << j
            qk |= int(row[k, 1]) << j
        p.append(pk)
        q.append(qk)
    return rows, BinaryCodeLines(m, tuple(p), tuple(q))


# ---------------------------------------------------------------------------
# secunda


def secundum_echelon(f1: int, f2: int) -> tuple[int, int]:
    """Reduced echelon basis (low, high) of the functional space <f1, f2>.

    For a 2-dimensional space {a, b, a^b} the echelon basis is the pair of
    its two smallest nonzero elements: the larger one has the top bit and a
    zero in the pivot position of the smaller one.
    """
    if f1 == 0 or f2 == 0 or f1 == f2:
        raise ValueError("functionals must be independent")
    a, b, c = sorted((f1, f2, f1 ^ f2))
    return a, b


def enumerate_secunda(m: int) -> np.ndarray:
    """Every secundum of PG(m-1, 2) once, as rows (f1, f2) with f1 < f2 < f1^f2."""
    top = 1 << m
    out = []
    f2 = np.arange(1, top, dtype=np.int64)
    for f1 in range(1, top):
        sel = f2[(f2 > f1) & ((f2 ^ f1) > f2)]
        if len(sel):
            out.append(np.stack([np.full(len(sel), f1, dtype=np.int64), sel], axis=1))
    return np.concatenate(out) if out else np.zeros((0, 2), dtype=np.int64)


def secundum_count(m: int) -> int:
    return (2**m - 1) * (2 ** (m - 1) - 1) // 3


def _functional_values(points: Sequence[int], m: int) -> np.ndarray:
    """vals[f, w] = packed bits over points of parity(f & point), 64 points per word."""
    n = len(points)
    words = max(1, (n + 63) // 64)
    fs = np.arange(1 << m, dtype=np.uint64)
    out = np.zeros((1 << m, words), dtype=np.uint64)
    for k, pt in enumerate(points):
        bit = (np.bitwise_count(fs & np.uint64(pt)) & np.uint64(1)).astype(np.uint64)
        out[:, k // 64] |= bit << np.uint64(k % 64)
    return out


def skew_counts(lines: BinaryCodeLines, secunda: np.ndarray | None = None) -> np.ndarray:
    """Number of codelines skew to each secundum (rows of `secunda`).

    With v_R = (f1(R), f2(R)), a line {P, Q, P+Q} misses the secundum iff
    none of v_P, v_Q, v_P + v_Q is zero.
    """
    if secunda is None:
        secunda = enumerate_secunda(lines.m)
    if len(lines) == 0:
        return np.zeros(len(secunda), dtype=np.int64)
    vp = _functional_values(lines.p, lines.m)
    vq = _functional_values(lines.q, lines.m)
    f1, f2 = secunda[:, 0], secunda[:, 1]
    p1, p2, q1, q2 = vp[f1], vp[f2], vq[f1], vq[f2]
    skew = (p1 | p2) & (q1 | q2) & ((p1 ^ q1) | (p2 ^ q2))
    return np.bitwise_count(skew).sum(axis=1).astype(np.int64)


def secundum_parity_check(lines: BinaryCodeLines, jobs: int = 1, allow_degenerate: bool = False) -> bool:
    """True iff every secundum of PG(m-1, 2) is skew to an even number of codelines."""
    bad = lines.degenerate()
    if bad and not allow_degenerate:
        raise DegenerateLineError(f"degenerate codelines at sections {bad}")
    if len(lines) == 0:
        return True
    sec = enumerate_secunda(lines.m)
    if jobs <= 1:
        return not np.any(skew_counts(lines, sec) % 2)
    chunks = np.array_split(sec, jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = pool.map(lambda c: not np.any(skew_counts(lines, c) % 2), chunks)
        return all(results)


def _gf2_rank(vectors: Sequence[int]) -> int:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def line_strength_check(lines: BinaryCodeLines, t: int) -> bool:
    """True iff any t codelines span a subspace of projective dimension 2t - 1."""
    if not 1 <= t <= 3:
        raise ValueError("line strength is only supported for t in 1..3")
    for sub in itertools.combinations(range(len(lines)), t):
        vecs = [v for k in sub for v in (lines.p[k], lines.q[k])]
        if _gf2_rank(vecs) != 2 * t:
            return False
    return True
