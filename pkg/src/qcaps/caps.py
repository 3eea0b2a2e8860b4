"""Caps (point sets with no three collinear points), secant coverage and the
plain-text cap file format.

Cap file format::

    # comment lines start with '#'
    PG 4 4
    n 10
    1 0 0 0 1 1 0 0 1 0
    ...                      (dim + 1 rows of digits; columns are points)

Wide caps may be written as several stacked blocks of dim + 1 rows each;
blocks are concatenated column-wise in reading order.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .geometry import Point, ProjSpace, enumerate_points, mask_to_bits, normalize

log = logging.getLogger(__name__)


class NotACapError(ValueError):
    pass


class IllegalExtension(ValueError):
    """Adding the point would put three cap points on a line."""


class CapFormatError(ValueError):
    pass


def _as_index(space: ProjSpace, p: Point | int | Sequence[int]) -> int:
    if isinstance(p, Point):
        return p.index
    if isinstance(p, (int, np.integer)):
        if not 0 <= p < space.n_points:
            raise IndexError(f"point index {p} out of range for {space}")
        return int(p)
    return space.index(p)


@dataclass(frozen=True)
class PointSet:
    """An arbitrary set of points of a projective space."""

    space: ProjSpace
    points: tuple[int, ...]

    def __post_init__(self):
        pts = tuple(sorted(int(p) for p in self.points))
        if len(set(pts)) != len(pts):
            raise ValueError("duplicate points")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_points(cls, space: ProjSpace, points: Iterable) -> "PointSet":
        return PointSet(space, tuple(_as_index(space, p) for p in points))

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, p) -> bool:
        return _as_index(self.space, p) in self.points

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def mask(self) -> int:
        m = 0
        for p in self.points:
            m |= 1 << p
        return m

    def matrix(self) -> np.ndarray:
        """(dim + 1) x n coordinate matrix, columns in sorted point order."""
        return self.space.coords[list(self.points)].T.copy()

    def same_points(self, other: "PointSet") -> bool:
        return self.space is other.space and self.points == other.points


@dataclass(frozen=True)
class Cap(PointSet):
    """A cap plus the bitset of every point lying on one of its secants
    (cap points included)."""

    covered: int = field(default=0, compare=False)

    @classmethod
    def empty(cls, space: ProjSpace) -> "Cap":
        return Cap(space, (), 0)

    @classmethod
    def from_points(cls, space: ProjSpace, points: Iterable) -> "Cap":
        idx = [_as_index(space, p) for p in points]
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate points")
        cap = Cap.empty(space)
        for p in idx:
            try:
                cap = add_point(cap, p)
            except IllegalExtension:
                raise NotACapError(f"point {space.point(p).coords} is collinear with two other points") from None
        return cap


def is_cap(points: Iterable, space: ProjSpace) -> bool:
    """True iff no three of the given points are collinear."""
    idx = [_as_index(space, p) for p in points]
    if len(set(idx)) != len(idx):
        raise ValueError("duplicate points")
    members = set(idx)
    third = space.third_point_table
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            for r in third[space.pair_index(idx[a], idx[b])]:
                if int(r) in members:
                    return False
    return True


def add_point(cap: Cap, p: Point | int | Sequence[int]) -> Cap:
    i = _as_index(cap.space, p)
    if (cap.covered >> i) & 1:
        raise IllegalExtension(f"point {i} lies on a secant of the cap" if i not in cap.points else f"point {i} already in the cap")
    masks = cap.space.line_masks
    row = cap.space.line_of[i]
    cov = cap.covered | (1 << i)
    for c in cap.points:
        cov |= masks[row[c]]
    return Cap(cap.space, cap.points + (i,), cov)


def is_complete(cap: Cap) -> bool:
    if not cap.points:
        raise ValueError("the empty set is not a complete cap")
    return cap.covered == cap.space.all_mask


def extension_points(cap: Cap) -> list[int]:
    """Points that can be added while keeping the cap property."""
    return mask_to_bits(cap.space.all_mask & ~cap.covered)


# ---------------------------------------------------------------------------
# file format

_HEADER = re.compile(r"^PG\s+(\d+)\s+(\d+)$")
_COUNT = re.compile(r"^n\s+(\d+)$")


@dataclass
class CapFile:
    dim: int
    q: int
    n: int
    matrix: np.ndarray  # (dim + 1) x n, as written

    @property
    def space(self) -> ProjSpace:
        return enumerate_points(self.dim, self.q)

    def columns(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in col) for col in self.matrix.T]


def read_cap_file(text: str) -> CapFile:
    rows: list[list[str]] = []
    header = count = None
    blocks: list[list[list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            continue
        if not line:
            continue
        if header is None:
            m = _HEADER.match(line)
            if not m:
                raise CapFormatError(f"line {lineno}: expected 'PG <dim> <q>' header")
            header = (int(m.group(1)), int(m.group(2)))
            continue
        if count is None:
            m = _COUNT.match(line)
            if not m:
                raise CapFormatError(f"line {lineno}: expected 'n <count>'")
            count = int(m.group(1))
            continue
        tokens = line.split()
        if not all(t.isdigit() for t in tokens):
            raise CapFormatError(f"line {lineno}: malformed digits {line!r}")
        rows.append(tokens)
    if header is None or count is None:
        raise CapFormatError("missing header")
    dim, q = header
    if q not in (2, 4):
        raise CapFormatError(f"unsupported field order {q}")
    h = dim + 1
    if len(rows) % h:
        raise CapFormatError(f"got {len(rows)} digit rows, not a multiple of {h}")
    for b in range(0, len(rows), h):
        block = rows[b:b + h]
        widths = {len(r) for r in block}
        if len(widths) != 1:
            raise CapFormatError(f"ragged block starting at digit row {b + 1}")
        blocks.append(block)
    if not blocks:
        mat = np.zeros((h, 0), dtype=np.uint8)
    else:
        mat = np.concatenate([np.array(b, dtype=np.int64) for b in blocks], axis=1)
    if mat.shape[1] != count:
        raise CapFormatError(f"header says n={count} but the matrix has {mat.shape[1]} columns")
    if mat.size and (mat.min() < 0 or mat.max() >= q):
        raise CapFormatError(f"digit outside GF({q})")
    return CapFile(dim, q, count, mat.astype(np.uint8))


def parse_points(text: str) -> PointSet:
    """Parse a cap file into a point set without requiring the cap property."""
    cf = read_cap_file(text)
    space = cf.space
    idx = []
    seen = {}
    for k, col in enumerate(cf.columns()):
        if not any(col):
            raise CapFormatError(f"column {k + 1} is the zero vector")
        norm = normalize(col)
        if norm != col:
            log.warning("column %d %s normalized to %s", k + 1, col, norm)
        i = space.index(norm)
        if i in seen:
            raise CapFormatError(f"column {k + 1} duplicates column {seen[i] + 1}")
        seen[i] = k
        idx.append(i)
    return PointSet(space, tuple(idx))


def parse_cap(text: str) -> Cap:
    ps = parse_points(text)
    return Cap.from_points(ps.space, ps.points)


def write_cap(cap: PointSet, comment: str | None = None) -> str:
    space = cap.space
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(f"PG {space.dim} {space.q}")
    out.append(f"n {len(cap)}")
    mat = cap.matrix()
    for row in mat:
        out.append(" ".join(str(int(x)) for x in row))
    return "\n".join(out) + "\n"


def load_cap(path) -> Cap:
    with open(path) as fh:
        return parse_cap(fh.read())


def load_points(path) -> PointSet:
    with open(path) as fh:
        return parse_points(fh.read())
