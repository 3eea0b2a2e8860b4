"""Exhaustive cap search.

Caps are grown depth-first in ordered mode: a node only adds points with a
larger index than the last added one, so every point set is reached exactly
once.  Each node carries two bitsets over the points of the space: the
points covered by the cap's secants and the candidates still addable.
Quantum and completeness tests are leaf filters; the only in-tree cuts are
the candidate bitset itself and size reachability.

Work is split by first extension point ("branch").  Results can be written
to an append-only JSON-lines file; a branch is marked finished only after
all of its hits are written, so an interrupted run resumes by skipping the
finished branches and re-running the rest.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Iterator

from . import equiv
from .caps import Cap, PointSet, add_point, is_cap
from .geometry import ProjSpace, _row_reduce, enumerate_points, mask_to_bits, normalize, rank
from .quantum import hyperplane_parity_ok

log = logging.getLogger(__name__)

# Largest caps: PG(2,4) hyperoval, PG(3,4) elliptic quadric, the 41-cap of PG(4,4).
MAX_CAP_SIZE = {(1, 4): 2, (2, 4): 6, (3, 4): 17, (4, 4): 41}

# Code-table bounds (n -> largest achievable d) for [n, 5]_4 linear codes.
CODE_TABLE_BOUNDS = {37: 25, 39: 27, 19: 11}

# Inequivalent caps of PG(3,4) of sizes 13, 15, 17 as (complete, incomplete).
PG34_CAP_CENSUS = {13: (1, 3), 15: (0, 1), 17: (1, 0)}


class BudgetExhausted(RuntimeError):
    def __init__(self, nodes: int):
        self.nodes = nodes
        super().__init__(f"node budget exhausted after {nodes} nodes; no verdict")


class MissingBoundError(KeyError):
    pass


def spans(space: ProjSpace, points) -> bool:
    """True iff the points span the whole space.

    The quantum filter of the search includes this: a quantum cap gives a
    [[n, n - 2(dim+1), 4]] code only when its matrix has full rank, and a
    cap inside a hyperplane can still meet every hyperplane with the right
    parity (for example a 12-cap of a solid of PG(4,4))."""
    pts = list(points)
    if len(pts) < space.dim + 1:
        return False
    return rank(space.coords[pts].T) == space.dim + 1


def max_cap_size(space: ProjSpace) -> int:
    if space.q == 2:
        return 2**space.dim
    return MAX_CAP_SIZE.get((space.dim, space.q), space.n_points)


# ---------------------------------------------------------------------------
# seeds


def embed_seed(seed: PointSet) -> Cap:
    """Lift a cap of PG(3,4) into the hyperplane x_4 = 0 of PG(4,4)."""
    if seed.space.dim != 3 or seed.space.q != 4:
        raise ValueError("seed must be a point set of PG(3,4)")
    if not is_cap(seed.points, seed.space):
        raise ValueError("seed is not a cap")
    big = enumerate_points(4, 4)
    pts = [big.index(tuple(int(x) for x in seed.space.coords[p]) + (0,)) for p in seed.points]
    return Cap.from_points(big, pts)


def seed_hyperplane(space: ProjSpace) -> int:
    """Dual index of the hyperplane x_dim = 0 that holds embedded seeds."""
    return space.index((0,) * space.dim + (1,))


@dataclass(frozen=True)
class SeedConstraint:
    n: int
    bounds: dict = field(default_factory=lambda: dict(CODE_TABLE_BOUNDS))
    require_quantum: bool = False

    @property
    def max_d(self) -> int:
        try:
            return self.bounds[self.n]
        except KeyError:
            raise MissingBoundError(f"no code-table bound for n={self.n}") from None

    @property
    def min_section(self) -> int:
        """Some hyperplane meets every n-cap in at least this many points."""
        return self.n - self.max_d


def allowed_seed_sizes(constraint: SeedConstraint, available_sizes: Iterable[int]) -> list[int]:
    lo = constraint.min_section
    out = []
    for s in sorted(set(available_sizes)):
        if s < lo:
            continue
        if constraint.require_quantum and s % 2 != constraint.n % 2:
            continue
        out.append(s)
    return out


# ---------------------------------------------------------------------------
# configuration and statistics


@dataclass
class SearchConfig:
    ambient: int = 4
    q: int = 4
    target: tuple[int, int] = (1, 1)
    seed: tuple[int, ...] = ()
    require_quantum: bool = False
    require_complete: bool = False
    restrict_outside_seed_hyperplane: bool = False
    jobs: int = 1
    budget: int | None = None
    out: str | None = None
    resume: str | None = None

    def __post_init__(self):
        if isinstance(self.target, int):
            self.target = (self.target, self.target)
        lo, hi = self.target
        if lo < 1 or hi < lo:
            raise ValueError(f"bad target range {self.target}")
        self.target = (int(lo), int(hi))
        self.seed = tuple(sorted(int(p) for p in self.seed))

    @property
    def space(self) -> ProjSpace:
        return enumerate_points(self.ambient, self.q)

    @classmethod
    def with_seed(cls, seed: PointSet, **kw) -> "SearchConfig":
        """Config seeded by a cap; caps of PG(3,4) are embedded into PG(4,4) first."""
        if seed.space.dim == 3 and seed.space.q == 4 and kw.get("ambient", 4) == 4:
            seed = embed_seed(seed)
        return cls(ambient=seed.space.dim, q=seed.space.q, seed=seed.points, **kw)

    def describe(self) -> dict:
        d = asdict(self)
        d["target"] = list(self.target)
        d["seed"] = list(self.seed)
        return {k: d[k] for k in ("ambient", "q", "target", "seed", "require_quantum", "require_complete", "restrict_outside_seed_hyperplane")}


@dataclass
class SearchStats:
    nodes: int = 0
    hits: int = 0
    branches: int = 0
    branches_done: int = 0
    per_depth: dict = field(default_factory=dict)
    per_branch: dict = field(default_factory=dict)
    exhaustive: bool = False

    def add_depths(self, depths: dict) -> None:
        for k, v in depths.items():
            self.per_depth[int(k)] = self.per_depth.get(int(k), 0) + v


# ---------------------------------------------------------------------------
# the tree walk


@dataclass(frozen=True)
class SearchNode:
    """One node of the ordered tree (reference form; the walker below keeps
    the same state in flat ints)."""

    cap: Cap
    candidates: int
    last_index: int = -1

    @classmethod
    def root(cls, config: SearchConfig) -> "SearchNode":
        space = config.space
        cap = Cap.from_points(space, config.seed)
        allowed = space.all_mask
        if config.restrict_outside_seed_hyperplane:
            allowed &= ~space.hyperplane_masks[seed_hyperplane(space)]
        return cls(cap, allowed & ~cap.covered, -1)

    def children(self) -> Iterator["SearchNode"]:
        rest = self.candidates
        while rest:
            low = rest & -rest
            p = low.bit_length() - 1
            rest ^= low
            cap = add_point(self.cap, p)
            yield SearchNode(cap, rest & ~cap.covered, p)


class _Walker:
    def __init__(self, config: SearchConfig):
        self.cfg = config
        space = config.space
        self.space = space
        self.lo, self.hi = config.target
        self.line_masks = space.line_masks
        self.line_rows = space.line_of.tolist()
        self.all_mask = space.all_mask
        # bit h of point_hyp[p] set iff p lies on hyperplane h
        self.point_hyp = [0] * space.n_points
        for h, hm in enumerate(space.hyperplane_masks):
            for p in mask_to_bits(hm):
                self.point_hyp[p] |= 1 << h
        self.all_hyp = (1 << space.n_points) - 1
        allowed = self.all_mask
        if config.restrict_outside_seed_hyperplane:
            allowed &= ~space.hyperplane_masks[seed_hyperplane(space)]
        self.allowed = allowed
        root = Cap.from_points(space, config.seed)
        self.root_points = list(root.points)
        self.root_covered = root.covered
        par = 0
        for p in root.points:
            par ^= self.point_hyp[p]
        self.root_parity = par
        self.nodes = 0
        self.depth_counts: dict[int, int] = {}

    def root_candidates(self) -> int:
        return self.allowed & ~self.root_covered

    def accept(self, pts: list[int], covered: int, parity: int) -> tuple[bool, bool, bool]:
        n = len(pts)
        if not self.lo <= n <= self.hi:
            return False, False, False
        complete = covered == self.all_mask
        quantum = parity == (self.all_hyp if n % 2 else 0) and spans(self.space, pts)
        if self.cfg.require_complete and not complete:
            return False, complete, quantum
        if self.cfg.require_quantum and not quantum:
            return False, complete, quantum
        return True, complete, quantum

    def extend(self, pts: list[int], covered: int, p: int) -> int:
        row = self.line_rows[p]
        masks = self.line_masks
        cov = covered | (1 << p)
        for c in pts:
            cov |= masks[row[c]]
        return cov

    def walk_branch(self, first: int, budget: int | None) -> Iterator[tuple[list[int], bool, bool]]:
        """All accepted caps whose first added point is `first`."""
        pts = list(self.root_points)
        cov = self.extend(pts, self.root_covered, first)
        pts.append(first)
        par = self.root_parity ^ self.point_hyp[first]
        cand = self.root_candidates() & ~cov & ~((1 << (first + 1)) - 1)
        yield from self._rec(pts, cov, cand, par, budget)

    def _rec(self, pts, cov, cand, par, budget):
        self.nodes += 1
        n = len(pts)
        self.depth_counts[n] = self.depth_counts.get(n, 0) + 1
        if budget is not None and self.nodes > budget:
            raise BudgetExhausted(self.nodes)
        ok, complete, quantum = self.accept(pts, cov, par)
        if ok:
            yield list(pts), complete, quantum
        if n >= self.hi or n + cand.bit_count() < self.lo:
            return
        point_hyp = self.point_hyp
        while cand:
            low = cand & -cand
            p = low.bit_length() - 1
            cand ^= low
            new_cov = self.extend(pts, cov, p)
            pts.append(p)
            yield from self._rec(pts, new_cov, cand & ~new_cov, par ^ point_hyp[p], budget)
            pts.pop()


def _branch_worker(cfg_dict: dict, branch: int, budget: int | None):
    cfg = SearchConfig(**cfg_dict)
    w = _Walker(cfg)
    hits = [(pts, c, qn) for pts, c, qn in w.walk_branch(branch, budget)]
    return branch, hits, w.nodes, w.depth_counts


def _cap_record(space: ProjSpace, branch: int, pts: list[int], complete: bool, quantum: bool) -> dict:
    cap = PointSet(space, tuple(pts))
    return {
        "kind": "cap",
        "branch": branch,
        "size": len(pts),
        "complete": complete,
        "quantum": quantum,
        "signature": equiv.signature(cap).digest(),
        "points": sorted(pts),
        "coords": ["".join(str(int(x)) for x in space.coords[p]) for p in sorted(pts)],
    }


def _load_checkpoint(path: str) -> tuple[dict, dict, list[dict]]:
    """(config record, finished branches -> record, hits of finished branches)."""
    config = {}
    done: dict[int, dict] = {}
    hits: list[dict] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                log.warning("ignoring truncated checkpoint line")
                continue
            kind = rec.get("kind")
            if kind == "config":
                config = rec
            elif kind == "branch":
                done[rec["branch"]] = rec
            elif kind == "cap":
                hits.append(rec)
    seen = set()
    kept = []
    for h in hits:
        key = (h["branch"], tuple(h["points"]))
        if h["branch"] in done and key not in seen:
            seen.add(key)
            kept.append(h)
    return config, done, kept


def run_search(config: SearchConfig, stats: SearchStats | None = None) -> Iterator[Cap]:
    """Stream every cap meeting the configured size range and predicates."""
    stats = stats if stats is not None else SearchStats()
    space = config.space
    lo, hi = config.target
    if lo > max_cap_size(space):
        log.info("no cap of size >= %d exists in %s", lo, space)
        stats.exhaustive = True
        return
    walker = _Walker(config)
    if config.restrict_outside_seed_hyperplane and config.seed:
        hyp = space.hyperplane_masks[seed_hyperplane(space)]
        if any(not (hyp >> p) & 1 for p in config.seed):
            raise ValueError("seed does not lie in the hyperplane x_dim = 0")

    out_path = config.out or config.resume
    done: dict[int, dict] = {}
    old_hits: list[dict] = []
    if config.resume and os.path.exists(config.resume):
        old_cfg, done, old_hits = _load_checkpoint(config.resume)
        if old_cfg and old_cfg.get("config") != config.describe():
            raise ValueError("checkpoint was written for a different search configuration")
    fh = None
    if out_path:
        fresh = not (config.resume and os.path.exists(config.resume)) or out_path != config.resume
        fh = open(out_path, "w" if fresh else "a")
        if fresh:
            fh.write(json.dumps({"kind": "config", "config": config.describe()}, sort_keys=True) + "\n")
            for rec in old_hits:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
            for rec in done.values():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
            fh.flush()

    def emit(branch, pts, complete, quantum):
        stats.hits += 1
        if fh:
            fh.write(json.dumps(_cap_record(space, branch, pts, complete, quantum), sort_keys=True) + "\n")
        return Cap.from_points(space, pts)

    try:
        # the root itself (seed or empty cap)
        walker.nodes += 1
        stats.per_depth[len(walker.root_points)] = stats.per_depth.get(len(walker.root_points), 0) + 1
        if walker.root_points:
            ok, complete, quantum = walker.accept(walker.root_points, walker.root_covered, walker.root_parity)
            if ok:
                yield emit(-1, walker.root_points, complete, quantum)
        stats.nodes += 1
        branches = mask_to_bits(walker.root_candidates())
        if len(walker.root_points) >= hi:
            branches = []
        stats.branches = len(branches)
        for rec in old_hits:
            stats.hits += 1
            yield Cap.from_points(space, rec["points"])
        for b, rec in done.items():
            stats.nodes += rec["nodes"]
            stats.per_branch[b] = rec["nodes"]
            stats.add_depths(rec.get("depths", {}))
            stats.branches_done += 1
        todo = [b for b in branches if b not in done]
        budget = config.budget

        def finish(b, nodes, depths):
            stats.nodes += nodes
            stats.per_branch[b] = nodes
            stats.add_depths(depths)
            stats.branches_done += 1
            if fh:
                fh.write(json.dumps({"kind": "branch", "branch": b, "nodes": nodes, "depths": depths}, sort_keys=True) + "\n")
                fh.flush()
            if budget is not None and stats.nodes > budget:
                raise BudgetExhausted(stats.nodes)

        if config.jobs <= 1:
            for b in todo:
                w = walker
                w.nodes, w.depth_counts = 0, {}
                remaining = None if budget is None else max(0, budget - stats.nodes)
                for pts, complete, quantum in w.walk_branch(b, remaining):
                    yield emit(b, pts, complete, quantum)
                finish(b, w.nodes, w.depth_counts)
        else:
            cfg = dict(config.__dict__, jobs=1, out=None, resume=None)
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                futures = [pool.submit(_branch_worker, cfg, b, budget) for b in todo]
                try:
                    for fut in as_completed(futures):
                        b, hits, nodes, depths = fut.result()
                        for pts, complete, quantum in hits:
                            yield emit(b, pts, complete, quantum)
                        finish(b, nodes, depths)
                except BaseException:
                    for f in futures:
                        f.cancel()
                    raise
        stats.exhaustive = True
        if fh:
            fh.write(json.dumps({"kind": "done", "nodes": stats.nodes, "hits": stats.hits}, sort_keys=True) + "\n")
    finally:
        if fh:
            fh.close()


# ---------------------------------------------------------------------------
# nonexistence and classification


@dataclass
class Certificate:
    verdict: bool  # True iff no cap satisfies the predicates
    size: int
    nodes: int
    hits: int
    branches: int
    per_branch: dict
    per_depth: dict
    config: dict

    def to_json(self) -> dict:
        d = asdict(self)
        d["per_branch"] = {str(k): v for k, v in sorted(self.per_branch.items())}
        d["per_depth"] = {str(k): v for k, v in sorted(self.per_depth.items())}
        return d


def nonexistence(size: int, config: SearchConfig, stop_at_first: bool = False) -> Certificate:
    """Run the full ordered search for `size`; verdict True iff nothing is found.

    Raises BudgetExhausted when the node budget runs out (no verdict)."""
    config = replace(config, target=(size, size))
    stats = SearchStats()
    hits = 0
    for _ in run_search(config, stats):
        hits += 1
        if stop_at_first:
            break
    return Certificate(
        verdict=hits == 0,
        size=size,
        nodes=stats.nodes,
        hits=hits,
        branches=stats.branches,
        per_branch=dict(stats.per_branch),
        per_depth=dict(stats.per_depth),
        config=config.describe(),
    )


@dataclass
class CapClass:
    representative: Cap
    members: int  # hits falling in this class (ordered mode), else 1
    signature: str


@dataclass
class Classification:
    size: int
    classes: list[CapClass]
    method: str
    stats: SearchStats | None = None

    @property
    def count(self) -> int:
        return len(self.classes)


def _intrinsic(ps: PointSet) -> PointSet:
    """The same configuration written in coordinates of its own span.

    Any projectivity between the spans of two point sets extends to the
    whole space, so equivalence can be decided there."""
    m = ps.matrix()
    red, pivots = _row_reduce(m)
    r = len(pivots)
    if r == ps.space.dim + 1 or r < 2:
        return ps
    sub = enumerate_points(r - 1, ps.space.q)
    pts = [sub.index(normalize([int(x) for x in col])) for col in red[:r].T]
    return PointSet(sub, tuple(pts))


def _equivalent(a: PointSet, b: PointSet, allow_frobenius: bool) -> bool:
    if a.n != b.n:
        return False
    ia, ib = _intrinsic(a), _intrinsic(b)
    if ia.space is not ib.space:
        return False
    if ia.n <= 1 or ia.n == ia.space.dim + 1:
        return True  # a point, or a basis of its span
    return equiv.are_equivalent(ia, ib, allow_frobenius=allow_frobenius) is not None


class _Buckets:
    def __init__(self, allow_frobenius: bool):
        self.allow_frobenius = allow_frobenius
        self.buckets: dict[str, list[CapClass]] = {}
        self.order: list[CapClass] = []

    def add(self, cap: Cap) -> bool:
        sig = equiv.signature(cap).digest()
        bucket = self.buckets.setdefault(sig, [])
        for cls in bucket:
            if _equivalent(cap, cls.representative, self.allow_frobenius):
                cls.members += 1
                return False
        cls = CapClass(cap, 1, sig)
        bucket.append(cls)
        self.order.append(cls)
        return True


def classify(
    size: int,
    space: ProjSpace,
    require_quantum: bool = False,
    require_complete: bool = False,
    allow_frobenius: bool = True,
    method: str = "auto",
    budget: int | None = None,
    jobs: int = 1,
    progress=None,
    checkpoint: str | None = None,
) -> Classification:
    """One representative per equivalence class of caps of the given size.

    method "ordered" runs the full ordered search and collapses the hits;
    method "levels" classifies caps size by size, extending only one
    representative per class (exhaustive because every (k+1)-cap contains a
    k-cap).  "auto" picks "ordered" for planes and "levels" otherwise.

    With `checkpoint`, every finished unfiltered size of the "levels" method
    is appended to that file, and later calls (any target size or predicate)
    start from the largest stored size below the target."""
    if method == "auto":
        method = "ordered" if space.dim <= 2 else "levels"
    if method == "ordered":
        cfg = SearchConfig(ambient=space.dim, q=space.q, target=(size, size), require_quantum=require_quantum,
                           require_complete=require_complete, budget=budget, jobs=jobs)
        stats = SearchStats()
        buckets = _Buckets(allow_frobenius)
        for cap in run_search(cfg, stats):
            buckets.add(cap)
        return Classification(size, buckets.order, "ordered", stats)
    if method != "levels":
        raise ValueError(f"unknown method {method!r}")
    if size > max_cap_size(space):
        return Classification(size, [], "levels", SearchStats(exhaustive=True))
    stats = SearchStats()
    reps = [Cap.empty(space)]
    start = 1
    stored = _load_levels(checkpoint, space, allow_frobenius) if checkpoint else {}
    usable = [k for k in stored if k < size]
    if usable:
        start = max(usable) + 1
        reps = [Cap.from_points(space, pts) for pts in stored[start - 1]]
        for k in sorted(usable):
            stats.per_depth[k] = len(stored[k])
        log.info("resuming at size %d from %d stored classes", start, len(reps))
    for level in range(start, size + 1):
        last = level == size
        flt = (require_quantum, require_complete) if last else (False, False)
        remaining = None if budget is None else budget - stats.nodes
        if jobs > 1 and len(reps) > 1:
            chunks = [reps[k::jobs] for k in range(jobs)]
            found: list[Cap] = []
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futs = [pool.submit(_extend_reps, space.dim, space.q, [r.points for r in c], flt, allow_frobenius, remaining) for c in chunks]
                for fut in futs:
                    pts_list, nodes = fut.result()
                    stats.nodes += nodes
                    found.extend(Cap.from_points(space, pts) for pts in pts_list)
            if budget is not None and stats.nodes > budget:
                raise BudgetExhausted(stats.nodes)
            buckets = _Buckets(allow_frobenius)
            for cap in found:
                buckets.add(cap)
        else:
            buckets, nodes = _extend(reps, flt, allow_frobenius, remaining)
            stats.nodes += nodes
        reps = [c.representative for c in buckets.order]
        stats.per_depth[level] = len(reps)
        if checkpoint and not last:
            _store_level(checkpoint, space, allow_frobenius, level, reps)
        if progress:
            progress(level, len(reps))
        if not reps:
            break
    stats.exhaustive = True
    classes = [CapClass(r, 1, equiv.signature(r).digest()) for r in reps]
    return Classification(size, classes, "levels", stats)


def _extend(reps: list[Cap], flt, allow_frobenius: bool, budget: int | None):
    """Classes of one-point extensions of the given caps passing the filter."""
    buckets = _Buckets(allow_frobenius)
    nodes = 0
    for rep in reps:
        for p in mask_to_bits(rep.space.all_mask & ~rep.covered):
            nodes += 1
            if budget is not None and nodes > budget:
                raise BudgetExhausted(nodes)
            cap = add_point(rep, p)
            if _passes(cap, *flt):
                buckets.add(cap)
    return buckets, nodes


def _extend_reps(dim, q, reps_points, flt, allow_frobenius, budget):
    space = enumerate_points(dim, q)
    buckets, nodes = _extend([Cap.from_points(space, pts) for pts in reps_points], flt, allow_frobenius, budget)
    return [c.representative.points for c in buckets.order], nodes


def _level_key(space: ProjSpace, allow_frobenius: bool) -> dict:
    return {"ambient": space.dim, "q": space.q, "group": "PGammaL" if allow_frobenius else "PGL"}


def _load_levels(path: str, space: ProjSpace, allow_frobenius: bool) -> dict[int, list[list[int]]]:
    """Complete levels stored in a classification checkpoint (JSON lines)."""
    if not os.path.exists(path):
        return {}
    key = _level_key(space, allow_frobenius)
    out = {}
    with open(path) as fh:
        for line in fh:
            try:
                rec = json.loads(line)
            except json.JSONDecodeError:
                continue
            if rec.get("key") == key:
                out[int(rec["level"])] = rec["reps"]
    return out


def _store_level(path: str, space: ProjSpace, allow_frobenius: bool, level: int, reps: list[Cap]) -> None:
    rec = {"key": _level_key(space, allow_frobenius), "level": level, "reps": [list(r.points) for r in reps]}
    with open(path, "a") as fh:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _passes(cap: Cap, require_quantum: bool, require_complete: bool) -> bool:
    if require_complete and cap.covered != cap.space.all_mask:
        return False
    if require_quantum and not (hyperplane_parity_ok(cap) and spans(cap.space, cap.points)):
        return False
    return True
