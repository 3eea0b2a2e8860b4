"""Weight distributions of cap codes and the GF(4)-side tests that decide
whether a cap is a quantum cap: hyperplane-intersection parity, even
weights and Hermitian self-orthogonality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import geometry as gf
from .caps import PointSet, is_cap


class NotAQuantumCapError(ValueError):
    def __init__(self, predicate: str, message: str | None = None):
        self.predicate = predicate
        super().__init__(message or f"not a quantum cap: {predicate} fails")


class RankDeficientError(ValueError):
    pass


class WeightDistribution(dict):
    """weight -> number of nonzero coefficient vectors x with wt(xG) = weight."""

    def as_pairs(self, include_zero: bool = False) -> list[list[int]]:
        pairs = [[int(w), int(c)] for w, c in sorted(self.items()) if c]
        if include_zero:
            pairs.insert(0, [0, 1])
        return pairs

    @property
    def total(self) -> int:
        return sum(self.values())


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    d: int
    pure: bool
    strength: int

    def __str__(self) -> str:
        return f"[[{self.n},{self.k},{self.d}]]"


def _coefficient_vectors(length: int, q: int = 4) -> np.ndarray:
    vecs = np.array(list(itertools.product(range(q), repeat=length)), dtype=np.uint8)
    return vecs[1:]


def codewords(ps: PointSet) -> np.ndarray:
    """All x.G for nonzero coefficient vectors x, one row per x."""
    g = ps.matrix()
    mul = gf.mul_table(ps.space.q)
    xs = _coefficient_vectors(g.shape[0], ps.space.q)
    out = np.zeros((len(xs), g.shape[1]), dtype=np.uint8)
    for r in range(g.shape[0]):
        out ^= mul[xs[:, r][:, None], g[r][None, :]]
    return out


def weight_distribution(ps: PointSet) -> WeightDistribution:
    weights = np.count_nonzero(codewords(ps), axis=1)
    vals, counts = np.unique(weights, return_counts=True)
    return WeightDistribution((int(v), int(c)) for v, c in zip(vals, counts))


def hyperplane_sections(ps: PointSet) -> np.ndarray:
    """|H n K| for every hyperplane H, indexed like the points (dual coordinates)."""
    inc = ps.space.incidence
    if not ps.points:
        return np.zeros(ps.space.n_points, dtype=np.int64)
    return inc[:, list(ps.points)].sum(axis=1)


def hyperplane_parity_ok(ps: PointSet) -> bool:
    sections = hyperplane_sections(ps)
    return bool(np.all(sections % 2 == ps.n % 2))


def all_weights_even(wd: dict) -> bool:
    return all(w % 2 == 0 for w, c in wd.items() if c)


def hermitian_self_orthogonal(ps: PointSet) -> bool:
    """sum_i u_i * conj(v_i) == 0 for every pair of rows (u = v included)."""
    g = ps.matrix()
    if g.shape[1] == 0:
        return True
    gc = gf.CONJ[g]
    prods = gf.MUL[g[:, None, :], gc[None, :, :]]
    return not np.bitwise_xor.reduce(prods, axis=2).any()


def matrix_rank(ps: PointSet) -> int:
    return gf.rank(ps.matrix())


def _subset_spans_hit(ps: PointSet, size: int) -> bool:
    """True iff some `size` independent points of ps span a subspace that
    contains a further point of ps."""
    space = ps.space
    pts = list(ps.points)
    coords = space.coords[pts].astype(np.uint8)
    member = np.zeros(space.n_points + 1, dtype=bool)
    member[pts] = True
    if size == 1:
        lam = np.ones((1, 1), dtype=np.uint8)
    else:
        lam = gf.enumerate_points(size - 1, space.q).coords
    mul = gf.mul_table(space.q)
    combos = np.array(list(itertools.combinations(range(len(pts)), size)), dtype=np.int64)
    chunk = max(1, 200_000 // len(lam))
    for start in range(0, len(combos), chunk):
        sub = combos[start:start + chunk]
        vecs = np.zeros((len(sub), len(lam), space.dim + 1), dtype=np.uint8)
        for j in range(size):
            vecs ^= mul[lam[:, j][None, :, None], coords[sub[:, j]][:, None, :]]
        idx = space.indices(vecs)
        hits = member[idx].sum(axis=1)
        # each span point appears once; the generators account for `size` of them
        if np.any(hits > size):
            return True
    return False


def strength(ps: PointSet) -> int:
    """Largest t such that every t columns of the matrix are independent."""
    n = ps.n
    if n == 0:
        return 0
    r = matrix_rank(ps)
    # every s-subset independent and all (s+1)-subsets checked via spans of s-subsets
    for s in range(1, r):
        if _subset_spans_hit(ps, s):
            return s
    return r


def code_params(ps: PointSet) -> CodeParams:
    """[[n, n - 2(dim+1), t + 1]] for a spanning quantum cap."""
    space = ps.space
    if not is_cap(ps.points, space):
        raise NotAQuantumCapError("is_cap")
    r = matrix_rank(ps)
    if r < space.dim + 1:
        raise RankDeficientError(f"matrix rank {r} < {space.dim + 1}: the points do not span {space}")
    if not hyperplane_parity_ok(ps):
        raise NotAQuantumCapError("hyperplane_parity_ok")
    if not all_weights_even(weight_distribution(ps)):
        raise NotAQuantumCapError("all_weights_even")
    if not hermitian_self_orthogonal(ps):
        raise NotAQuantumCapError("hermitian_self_orthogonal")
    t = strength(ps)
    return CodeParams(n=ps.n, k=ps.n - 2 * (space.dim + 1), d=t + 1, pure=True, strength=t)
