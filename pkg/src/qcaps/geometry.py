"""Arithmetic over GF(2) and GF(4), and the point/line/hyperplane structure
of the projective spaces PG(k, 2) and PG(k, 4).

GF(4) elements are the integers 0..3 standing for 0, 1, w, w^2 where
w^2 + w + 1 = 0.  In the basis {1, w} the two bits of the integer are the
coordinates, so field addition is plain XOR (3 = 1 + w).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple, Sequence

import numpy as np

W = 2  # w
W2 = 3  # w^2

# MUL[a, b] = a * b
MUL = np.array(
    [
        [0, 0, 0, 0],
        [0, 1, 2, 3],
        [0, 2, 3, 1],
        [0, 3, 1, 2],
    ],
    dtype=np.uint8,
)
INV = np.array([0, 1, 3, 2], dtype=np.uint8)  # INV[0] is a placeholder
CONJ = np.array([0, 1, 3, 2], dtype=np.uint8)  # a -> a^2

_MUL = MUL.tolist()
_INV = INV.tolist()


def gf4_add(a: int, b: int) -> int:
    return a ^ b


def gf4_mul(a: int, b: int) -> int:
    """Multiply two GF(4) elements under the {0, 1, w, w^2} = {0, 1, 2, 3} encoding."""
    return _MUL[a][b]


def gf4_inverse(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(4)")
    return _INV[a]


def gf4_conj(a: int) -> int:
    """Frobenius square: fixes 0 and 1, swaps w and w^2."""
    return _MUL[a][a]


def mul_table(q: int) -> np.ndarray:
    if q == 4:
        return MUL
    if q == 2:
        return MUL[:2, :2]
    raise ValueError(f"unsupported field order {q}; only 2 and 4 are supported")


class Point(NamedTuple):
    index: int
    coords: tuple[int, ...]


# ---------------------------------------------------------------------------
# small dense linear algebra over GF(4) (GF(2) is the {0,1} subfield)


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(4)."""
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    prod = MUL[a[:, :, None], b[None, :, :]]
    return np.bitwise_xor.reduce(prod, axis=1)


def _row_reduce(m: np.ndarray) -> tuple[np.ndarray, list[int]]:
    m = np.array(m, dtype=np.uint8, copy=True)
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if len(nz) == 0:
            continue
        p = r + nz[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = MUL[_INV[m[r, c]], m[r]]
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] ^= MUL[m[i, c], m[r]]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(m: np.ndarray) -> int:
    m = np.asarray(m, dtype=np.uint8)
    if m.size == 0:
        return 0
    return len(_row_reduce(m)[1])


def inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a square GF(4) matrix; raises ValueError when singular."""
    m = np.asarray(m, dtype=np.uint8)
    n = m.shape[0]
    aug = np.concatenate([m, np.eye(n, dtype=np.uint8)], axis=1)
    red, pivots = _row_reduce(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("singular matrix")
    return red[:, n:]


def normalize(vec: Sequence[int]) -> tuple[int, ...]:
    """Scale a nonzero vector so that its leftmost nonzero entry is 1."""
    for x in vec:
        if x:
            s = _INV[x]
            return tuple(_MUL[s][y] for y in vec)
    raise ValueError("zero vector is not a projective point")


def bits_to_mask(bits) -> int:
    m = 0
    for b in bits:
        m |= 1 << int(b)
    return m


def mask_to_bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ProjSpace:
    """PG(dim, q) with points in lexicographic order of their normalized
    coordinates.  Lines and hyperplane incidences are built lazily and
    cached; the object is never mutated after that.
    """

    dim: int
    q: int
    coords: np.ndarray  # (N, dim + 1) uint8
    vec_index: np.ndarray  # base-q code of any vector -> point index, -1 for zero

    def __repr__(self) -> str:
        return f"PG({self.dim},{self.q})"

    @property
    def n_points(self) -> int:
        return len(self.coords)

    @property
    def points(self) -> list[Point]:
        return [self.point(i) for i in range(self.n_points)]

    @cached_property
    def all_mask(self) -> int:
        return (1 << self.n_points) - 1

    @cached_property
    def _weights(self) -> np.ndarray:
        return (self.q ** np.arange(self.dim, -1, -1)).astype(np.int64)

    @cached_property
    def codes(self) -> np.ndarray:
        """Base-q code of each point's coordinate vector.  For q = 4 the code
        packs one GF(4) digit per 2 bits, so vector addition is int XOR."""
        return (self.coords.astype(np.int64) @ self._weights).astype(np.int64)

    @cached_property
    def scale_codes(self) -> list[list[int]]:
        """scale_codes[lam][code] = code of lam * vector."""
        mul = mul_table(self.q)
        allv = np.array(list(itertools.product(range(self.q), repeat=self.dim + 1)), dtype=np.uint8)
        out = []
        for lam in range(self.q):
            out.append((mul[lam][allv].astype(np.int64) @ self._weights).tolist())
        return out

    @cached_property
    def conj_codes(self) -> list[int]:
        """Code of the entrywise Frobenius image of each vector code."""
        conj = CONJ if self.q == 4 else np.arange(2, dtype=np.uint8)
        allv = np.array(list(itertools.product(range(self.q), repeat=self.dim + 1)), dtype=np.uint8)
        return (conj[allv].astype(np.int64) @ self._weights).tolist()

    def point(self, i: int) -> Point:
        return Point(int(i), tuple(int(x) for x in self.coords[i]))

    def index(self, vec: Sequence[int]) -> int:
        """Index of the projective point spanned by a nonzero vector."""
        code = 0
        for x in vec:
            if not 0 <= x < self.q:
                raise ValueError(f"coordinate {x} is not an element of GF({self.q})")
            code = code * self.q + int(x)
        if len(vec) != self.dim + 1:
            raise ValueError(f"expected {self.dim + 1} coordinates, got {len(vec)}")
        i = int(self.vec_index[code])
        if i < 0:
            raise ValueError("zero vector is not a projective point")
        return i

    def indices(self, vecs: np.ndarray) -> np.ndarray:
        """Vectorised index lookup along the last axis; zero vectors give -1."""
        vecs = np.asarray(vecs, dtype=np.int64)
        return self.vec_index[vecs @ self._weights]

    # -- lines -------------------------------------------------------------

    @cached_property
    def _line_data(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n_points
        q = self.q
        mul = mul_table(q)
        iu, ju = np.triu_indices(n, k=1)
        pts = self.coords
        third = np.empty((len(iu), q - 1), dtype=np.int32)
        for s, lam in enumerate(range(1, q)):
            third[:, s] = self.indices(pts[iu] ^ mul[lam][pts[ju]])
        full = np.concatenate([iu[:, None], ju[:, None], third], axis=1)
        full.sort(axis=1)
        lines, line_id = np.unique(full, axis=0, return_inverse=True)
        line_of = np.full((n, n), -1, dtype=np.int32)
        line_of[iu, ju] = line_id.ravel()
        line_of[ju, iu] = line_id.ravel()
        return third, lines.astype(np.int32), line_of

    @property
    def third_point_table(self) -> np.ndarray:
        """Flat triangular table: row ``pair_index(i, j)`` holds the q - 1
        remaining points of the line through i and j."""
        return self._line_data[0]

    def pair_index(self, i: int, j: int) -> int:
        if i == j:
            raise ValueError("a pair needs two distinct points")
        if i > j:
            i, j = j, i
        n = self.n_points
        return i * (2 * n - i - 1) // 2 + (j - i - 1)

    @property
    def lines(self) -> np.ndarray:
        """All lines as rows of sorted point indices, shape (L, q + 1)."""
        return self._line_data[1]

    @property
    def line_of(self) -> np.ndarray:
        """line_of[i, j] is the id of the line through points i != j."""
        return self._line_data[2]

    @cached_property
    def line_masks(self) -> list[int]:
        masks = []
        for row in self.lines.tolist():
            m = 0
            for p in row:
                m |= 1 << p
            masks.append(m)
        return masks

    # -- hyperplanes -------------------------------------------------------

    @cached_property
    def incidence(self) -> np.ndarray:
        """Boolean (N, N) matrix: incidence[h, x] iff point x lies on the
        hyperplane with dual coordinates ``coords[h]`` (sum h_i x_i = 0)."""
        mul = mul_table(self.q)
        pts = self.coords
        acc = np.zeros((self.n_points, self.n_points), dtype=np.uint8)
        for c in range(self.dim + 1):
            acc ^= mul[pts[:, c][:, None], pts[:, c][None, :]]
        return acc == 0

    @cached_property
    def hyperplane_masks(self) -> list[int]:
        return [bits_to_mask(np.flatnonzero(row)) for row in self.incidence]

    def span_mask(self, indices: Sequence[int]) -> int:
        """Bitmask of the projective subspace spanned by the given points."""
        span = 0
        line_of = self.line_of
        masks = self.line_masks
        for p in indices:
            if (span >> p) & 1:
                continue
            new = span | (1 << p)
            for s in mask_to_bits(span):
                new |= masks[line_of[s, p]]
            span = new
        return span


def enumerate_points(dim: int, field_order: int) -> ProjSpace:
    """Build PG(dim, field_order) for field_order in {2, 4}.  Cached."""
    if field_order not in (2, 4):
        raise ValueError(f"unsupported field order {field_order}; only 2 and 4 are supported")
    if dim < 1:
        raise ValueError("projective dimension must be at least 1")
    return _build_space(dim, field_order)


@lru_cache(maxsize=None)
def _build_space(dim: int, q: int) -> ProjSpace:
    vecs = np.array(list(itertools.product(range(q), repeat=dim + 1)), dtype=np.uint8)
    nz = vecs != 0
    first = np.argmax(nz, axis=1)
    lead = vecs[np.arange(len(vecs)), first]
    is_point = nz.any(axis=1) & (lead == 1)
    coords = vecs[is_point]
    # itertools.product already runs in lexicographic order
    vec_index = np.full(len(vecs), -1, dtype=np.int32)
    point_codes = np.flatnonzero(is_point)
    vec_index[point_codes] = np.arange(len(point_codes))
    mul = mul_table(q)
    for lam in range(2, q):
        scaled = mul[lam][coords]
        codes = scaled.astype(np.int64) @ (q ** np.arange(dim, -1, -1))
        vec_index[codes] = np.arange(len(point_codes))
    coords.setflags(write=False)
    vec_index.setflags(write=False)
    return ProjSpace(dim, q, coords, vec_index)


def line_through(p: Point | int, q: Point | int, space: ProjSpace) -> list[Point]:
    """All points of the line joining two distinct points: p, q, then the
    points p + lambda*q for nonzero lambda."""
    i = p.index if isinstance(p, Point) else int(p)
    j = q.index if isinstance(q, Point) else int(q)
    if i == j:
        raise ValueError("a line needs two distinct points")
    mul = mul_table(space.q)
    a = space.coords[i]
    b = space.coords[j]
    out = [space.point(i), space.point(j)]
    for lam in range(1, space.q):
        out.append(space.point(space.index(a ^ mul[lam][b])))
    return out
