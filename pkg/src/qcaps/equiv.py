"""Projective and semilinear equivalence of caps, cap stabilizers and
invariant signatures.

A collineation is x -> M * sigma(x) where sigma is either the identity or
the entrywise Frobenius map a -> a^2, and M is an invertible matrix taken up
to scalars (stored with its first nonzero entry equal to 1).

Equivalence search: fix an ordered basis p_0..p_d inside the source cap and
write every other source point in that basis.  Branch on the image q_k and
the scalar lambda_k of each basis vector (lambda_0 = 1 kills the global
scalar).  As soon as every basis point a source point depends on has been
assigned, its image is known and must land in the target cap, which prunes
the tree early when the basis is chosen so that its leading planes and
solids contain many cap points.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import geometry as gf
from .caps import Cap, PointSet
from .geometry import ProjSpace, mask_to_bits


class NonSpanningError(ValueError):
    pass


@dataclass(frozen=True)
class Collineation:
    matrix: tuple[tuple[int, ...], ...]
    frobenius: bool = False

    @classmethod
    def from_array(cls, m, frobenius: bool = False) -> "Collineation":
        m = np.asarray(m, dtype=np.uint8)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("collineation matrix must be square")
        if gf.rank(m) < m.shape[0]:
            raise ValueError("singular matrix")
        flat = m.ravel()
        lead = int(flat[np.flatnonzero(flat)[0]])
        m = gf.MUL[gf.gf4_inverse(lead)][m]
        return cls(tuple(tuple(int(x) for x in row) for row in m), bool(frobenius))

    @classmethod
    def identity(cls, size: int) -> "Collineation":
        return cls.from_array(np.eye(size, dtype=np.uint8))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.uint8)

    @property
    def size(self) -> int:
        return len(self.matrix)

    def __matmul__(self, other: "Collineation") -> "Collineation":
        return compose(self, other)

    @classmethod
    def from_row_action(cls, m, frobenius: bool = False) -> "Collineation":
        """From a matrix acting on row vectors (x -> x M), as printed in the literature."""
        return cls.from_array(np.asarray(m, dtype=np.uint8).T, frobenius)

    def row_action(self) -> np.ndarray:
        return self.array.T.copy()

    def format(self, rows: bool = True) -> str:
        """Text matrix; by default in the row-vector layout (x -> x M)."""
        m = self.row_action() if rows else self.array
        text = "\n".join(" ".join(str(int(x)) for x in row) for row in m)
        return text + ("\n(with Frobenius)" if self.frobenius else "")


def compose(a: Collineation, b: Collineation) -> Collineation:
    """a after b."""
    bm = b.array
    if a.frobenius:
        bm = gf.CONJ[bm]
    return Collineation.from_array(gf.mat_mul(a.array, bm), a.frobenius != b.frobenius)


def invert(c: Collineation) -> Collineation:
    inv = gf.inverse(c.array)
    if c.frobenius:
        inv = gf.CONJ[inv]
    return Collineation.from_array(inv, c.frobenius)


def map_points(c: Collineation, space: ProjSpace, points) -> list[int]:
    vecs = space.coords[list(points)]
    if c.frobenius:
        vecs = gf.CONJ[vecs]
    m = c.array
    if m.shape[0] != space.dim + 1:
        raise ValueError(f"{m.shape[0]}x{m.shape[0]} matrix does not act on {space}")
    img = np.bitwise_xor.reduce(gf.MUL[m[None, :, :], vecs[:, None, :]], axis=2)
    return [int(i) for i in space.indices(img)]


def apply(c: Collineation, ps: PointSet) -> PointSet:
    if gf.rank(c.array) < c.size:
        raise ValueError("singular matrix")
    img = map_points(c, ps.space, ps.points)
    if isinstance(ps, Cap):
        return Cap.from_points(ps.space, img)
    return PointSet(ps.space, tuple(img))


# ---------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class InvariantSignature:
    n: int
    hyperplane_profile: tuple[int, ...]
    point_profiles: tuple[tuple[int, ...], ...]

    def digest(self) -> str:
        return hashlib.sha1(repr(self).encode()).hexdigest()[:16]


def _point_profiles(ps: PointSet) -> dict[int, tuple[int, ...]]:
    """For each point p of ps, the histogram of |H n K| over hyperplanes H through p."""
    space = ps.space
    pts = list(ps.points)
    if not pts:
        return {}
    inc = space.incidence
    sections = inc[:, pts].sum(axis=1)
    out = {}
    for p in pts:
        hist = np.bincount(sections[inc[:, p]], minlength=ps.n + 1)
        out[p] = tuple(int(x) for x in hist)
    return out


def signature(ps: PointSet) -> InvariantSignature:
    space = ps.space
    pts = list(ps.points)
    sections = space.incidence[:, pts].sum(axis=1) if pts else np.zeros(space.n_points, dtype=int)
    prof = _point_profiles(ps)
    return InvariantSignature(
        n=ps.n,
        hyperplane_profile=tuple(int(x) for x in np.sort(sections)),
        point_profiles=tuple(sorted(prof.values())),
    )


# ---------------------------------------------------------------------------
# search


def _require_spanning(ps: PointSet) -> None:
    r = gf.rank(ps.matrix()) if ps.points else 0
    if r < ps.space.dim + 1:
        raise NonSpanningError(f"point set of rank {r} does not span {ps.space}")


def _choose_basis(space: ProjSpace, pts: list[int]) -> list[int]:
    """Independent points of pts whose successive spans hold many of pts."""
    amask = gf.bits_to_mask(pts)
    d = space.dim
    if len(pts) < 3 or d < 2:
        basis = [pts[0]]
    else:
        best = None
        for a, b in itertools.combinations(pts, 2):
            line = space.line_masks[space.line_of[a, b]]
            for c in pts:
                if (line >> c) & 1:
                    continue
                cnt = (space.span_mask([a, b, c]) & amask).bit_count()
                if best is None or cnt > best[0]:
                    best = (cnt, [a, b, c])
            if best[0] >= 6:
                break
        basis = best[1]
    span = space.span_mask(basis)
    while len(basis) < d + 1:
        best = None
        for c in pts:
            if (span >> c) & 1:
                continue
            s = space.span_mask(basis + [c])
            cnt = (s & amask).bit_count()
            if best is None or cnt > best[0]:
                best = (cnt, c, s)
        if best is None:
            raise NonSpanningError("point set does not span the space")
        basis.append(best[1])
        span = best[2]
    return basis


def _linear_maps(space: ProjSpace, src_codes: list[int], dst: PointSet, src_prof: list, dst_prof: dict, find_all: bool) -> Iterator[np.ndarray]:
    """Yield matrices M with M(src) = dst (projectively), src given by vector codes."""
    d1 = space.dim + 1
    q = space.q
    vec_index = space.vec_index.tolist()
    scale = space.scale_codes
    src_idx = [vec_index[c] for c in src_codes]
    code_of = dict(zip(src_idx, src_codes))
    prof_of = dict(zip(src_idx, src_prof))
    basis = _choose_basis(space, src_idx)
    pmat = space.coords[basis].T
    pinv = gf.inverse(pmat)
    # coordinates of every other source point in the chosen basis
    by_depth: list[list[tuple[tuple[int, ...], int]]] = [[] for _ in range(d1)]
    for i in src_idx:
        if i in basis:
            continue
        c = np.bitwise_xor.reduce(gf.MUL[pinv, space.coords[i][None, :]], axis=1)
        nz = np.flatnonzero(c)
        by_depth[int(nz[-1])].append((tuple(int(x) for x in c), prof_of[i]))
    dst_pts = list(dst.points)
    dst_mask = dst.mask
    codes = space.codes.tolist()
    line_of = space.line_of
    lmasks = space.line_masks
    qcodes = [0] * d1

    def rec(k: int, span: int, span_pts: list[int]):
        want = prof_of[basis[k]]
        for b in dst_pts:
            if (span >> b) & 1 or dst_prof[b] != want:
                continue
            new_span = span | (1 << b)
            for s in span_pts:
                new_span |= lmasks[line_of[s, b]]
            for lam in range(1, q) if k else (1,):
                qcodes[k] = scale[lam][codes[b]]
                ok = True
                for coeffs, prof in by_depth[k]:
                    code = 0
                    for i in range(k + 1):
                        if coeffs[i]:
                            code ^= scale[coeffs[i]][qcodes[i]]
                    j = vec_index[code]
                    if not (dst_mask >> j) & 1 or dst_prof[j] != prof:
                        ok = False
                        break
                if not ok:
                    continue
                if k + 1 == d1:
                    qmat = np.array([[(c >> (2 * (d1 - 1 - r))) & 3 if q == 4 else (c >> (d1 - 1 - r)) & 1 for c in qcodes] for r in range(d1)], dtype=np.uint8)
                    yield gf.mat_mul(qmat, pinv)
                    if not find_all:
                        return
                else:
                    found = False
                    for m in rec(k + 1, new_span, gf.mask_to_bits(new_span)):
                        found = True
                        yield m
                        if not find_all:
                            break
                    if found and not find_all:
                        return

    yield from rec(0, 0, [])


def _prepared(a: PointSet, frobenius: bool):
    space = a.space
    codes = [space.codes[p] for p in a.points]
    if frobenius:
        conj = space.conj_codes
        codes = [conj[c] for c in codes]
        img = PointSet(space, tuple(int(space.vec_index[c]) for c in codes))
    else:
        img = a
    prof = _point_profiles(img)
    return [int(c) for c in codes], [prof[int(space.vec_index[c])] for c in codes]


def _collineations(a: PointSet, b: PointSet, frobenius: bool, find_all: bool) -> Iterator[Collineation]:
    codes, prof = _prepared(a, frobenius)
    bprof = _point_profiles(b)
    for m in _linear_maps(a.space, codes, b, prof, bprof, find_all):
        yield Collineation.from_array(m, frobenius)


def are_equivalent(a: PointSet, b: PointSet, allow_frobenius: bool = True, use_signature: bool = True) -> Collineation | None:
    """A collineation c with apply(c, a) == b, or None when none exists.

    The search is exhaustive: None is a proof of inequivalence under PGL
    (or PGammaL when allow_frobenius)."""
    if a.space is not b.space:
        raise ValueError("caps live in different spaces")
    _require_spanning(a)
    _require_spanning(b)
    if a.n != b.n:
        return None
    if use_signature and signature(a) != signature(b):
        return None
    for frob in (False, True) if allow_frobenius and a.space.q == 4 else (False,):
        for c in _collineations(a, b, frob, find_all=False):
            return c
    return None


@dataclass
class StabilizerResult:
    order: int
    generators: list[Collineation]
    elements: list[Collineation]
    closure_checked: bool


def group_closure(gens: list[Collineation], size: int) -> set[Collineation]:
    ident = Collineation.identity(size)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                x = compose(h, g)
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
    return seen


def check_closure(elements: list[Collineation]) -> bool:
    """Exhaustive multiplication-table check: closed under products and inverses."""
    elems = set(elements)
    for g in elements:
        if invert(g) not in elems:
            return False
        for h in elements:
            if compose(g, h) not in elems:
                return False
    return True


def stabilizer(ps: PointSet, allow_frobenius: bool = False, closure_limit: int = 200) -> StabilizerResult:
    """All collineations fixing ps setwise, a generating set, and the
    multiplication-table closure check (skipped above `closure_limit`)."""
    _require_spanning(ps)
    elements: list[Collineation] = []
    for frob in (False, True) if allow_frobenius and ps.space.q == 4 else (False,):
        elements.extend(_collineations(ps, ps, frob, find_all=True))
    size = ps.space.dim + 1
    gens: list[Collineation] = []
    closure: set[Collineation] = {Collineation.identity(size)}
    for g in elements:
        if g not in closure:
            gens.append(g)
            closure = group_closure(gens, size)
    if len(closure) != len(elements) or closure != set(elements):
        raise AssertionError("generated group differs from the enumerated stabilizer")
    checked = len(elements) <= closure_limit
    if checked and not check_closure(elements):
        raise AssertionError("stabilizer is not closed under composition")
    return StabilizerResult(len(elements), gens, elements, checked)


def orbit_partition(ps: PointSet, group: list[Collineation]) -> list[list[int]]:
    """Orbits of the group on the points of ps."""
    parent = {p: p for p in ps.points}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in group:
        for p, img in zip(ps.points, map_points(g, ps.space, ps.points)):
            ra, rb = find(p), find(img)
            if ra != rb:
                parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for p in ps.points:
        groups.setdefault(find(p), []).append(p)
    return sorted(groups.values())

