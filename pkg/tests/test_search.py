import itertools
import json

import numpy as np
import pytest

from qcaps.caps import Cap, PointSet, is_cap, read_cap_file
from qcaps.equiv import are_equivalent
from qcaps.fixtures import fixture
from qcaps.geometry import enumerate_points, rank
from qcaps.quantum import hyperplane_parity_ok
from qcaps.search import (
    PG34_CAP_CENSUS,
    BudgetExhausted,
    MissingBoundError,
    SearchConfig,
    SearchNode,
    SearchStats,
    SeedConstraint,
    allowed_seed_sizes,
    classify,
    embed_seed,
    nonexistence,
    run_search,
    seed_hyperplane,
    spans,
)

import oracles


def _coord_sets(caps):
    out = []
    for c in caps:
        out.append(frozenset(tuple(int(x) for x in c.space.coords[p]) for p in c.points))
    return out


def test_plane_oracle_all_caps():
    caps, quantum = oracles.plane_caps(7)
    found = list(run_search(SearchConfig(ambient=2, target=(1, 7))))
    by_size = {}
    for s in _coord_sets(found):
        by_size.setdefault(len(s), []).append(s)
    for size in range(1, 8):
        got = by_size.get(size, [])
        assert len(got) == len(set(got))
        assert set(got) == set(caps[size]), size
    assert not caps[7]


def test_plane_oracle_quantum():
    _, quantum = oracles.plane_caps(7)
    found = list(run_search(SearchConfig(ambient=2, target=(1, 7), require_quantum=True)))
    assert set(_coord_sets(found)) == {s for size in quantum for s in quantum[size]}
    assert {len(s) for s in _coord_sets(found)} == {6}
    assert len(found) == 168


def _collinear_oracle(a, b, r):
    for lam in range(1, 4):
        v = tuple(x ^ oracles.f4_mul(lam, y) for x, y in zip(a, b))
        lead = next(x for x in v if x)
        if tuple(oracles.f4_mul(oracles.f4_inv(lead), x) for x in v) == r:
            return True
    return False


def test_solid_oracle_small_sizes():
    pts = oracles.proj_points(3)
    triples = {frozenset(pts[i] for i in t) for t in itertools.combinations(range(len(pts)), 3)
               if not _collinear_oracle(pts[t[0]], pts[t[1]], pts[t[2]])}
    found = _coord_sets(run_search(SearchConfig(ambient=3, target=(3, 3))))
    assert len(found) == len(set(found))
    assert set(found) == triples


def test_soundness_and_filters(pg44):
    cfg = SearchConfig(ambient=2, target=(4, 6), require_complete=True)
    for cap in run_search(cfg):
        assert is_cap(cap.points, cap.space)
        assert cap.covered == cap.space.all_mask
        assert cap.n == 6  # only hyperovals are complete in PG(2,4)


def test_search_nodes_match_walker():
    cfg = SearchConfig(ambient=2, target=(1, 6))
    seen = []
    stack = [SearchNode.root(cfg)]
    space = cfg.space
    rng = np.random.default_rng(3)
    while stack:
        node = stack.pop()
        if node.cap.n:
            seen.append(node.cap.points)
        if rng.random() < 0.2:
            # recompute the candidate set from scratch
            cov = node.cap.mask
            for a, b in itertools.combinations(node.cap.points, 2):
                cov |= space.line_masks[space.line_of[a, b]]
            expected = space.all_mask & ~cov & ~((1 << (node.last_index + 1)) - 1)
            assert node.candidates == expected
        stack.extend(node.children())
    walker = [c.points for c in run_search(cfg)]
    assert sorted(seen) == sorted(walker)


def test_deterministic_order():
    cfg = dict(ambient=2, target=(3, 5))
    a = [c.points for c in run_search(SearchConfig(**cfg))]
    b = [c.points for c in run_search(SearchConfig(**cfg))]
    assert a == b


def test_parallel_same_set():
    cfg = dict(ambient=2, target=(4, 6))
    single = sorted(c.points for c in run_search(SearchConfig(**cfg)))
    stats = SearchStats()
    multi = sorted(c.points for c in run_search(SearchConfig(**cfg, jobs=2), stats))
    assert single == multi
    assert stats.exhaustive and stats.branches == 21


def test_target_above_maximum():
    stats = SearchStats()
    assert list(run_search(SearchConfig(target=42, require_quantum=True), stats)) == []
    assert stats.exhaustive
    assert list(run_search(SearchConfig(ambient=2, target=7))) == []


def test_budget_is_distinct_from_empty():
    with pytest.raises(BudgetExhausted) as err:
        list(run_search(SearchConfig(ambient=2, target=6, budget=100)))
    assert err.value.nodes > 100 - 1
    with pytest.raises(BudgetExhausted):
        nonexistence(7, SearchConfig(ambient=3, budget=500))


def test_bad_config():
    with pytest.raises(ValueError):
        SearchConfig(target=(5, 3))
    with pytest.raises(ValueError):
        SearchConfig(target=0)


def test_checkpoint_resume(tmp_path):
    path = tmp_path / "run.jsonl"
    cfg = dict(ambient=2, target=(5, 6))
    full = sorted(c.points for c in run_search(SearchConfig(**cfg)))
    it = run_search(SearchConfig(**cfg, out=str(path)))
    for _ in range(400):
        next(it)
    it.close()
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    done = {r["branch"] for r in recs if r["kind"] == "branch"}
    assert recs[0]["kind"] == "config" and 0 < len(done) < 21
    stats = SearchStats()
    resumed = sorted(c.points for c in run_search(SearchConfig(**cfg, resume=str(path)), stats))
    assert resumed == full
    assert json.loads(path.read_text().splitlines()[-1])["kind"] == "done"
    # a second resume of a finished file replays only the records
    again = sorted(c.points for c in run_search(SearchConfig(**cfg, resume=str(path))))
    assert again == full
    cap_rec = next(r for r in recs if r["kind"] == "cap")
    assert set(cap_rec) >= {"size", "complete", "quantum", "signature", "coords", "points"}


def test_resume_rejects_other_config(tmp_path):
    path = tmp_path / "run.jsonl"
    list(run_search(SearchConfig(ambient=2, target=5, out=str(path))))
    with pytest.raises(ValueError):
        list(run_search(SearchConfig(ambient=2, target=6, resume=str(path))))


def test_seeded_search_recovers_cap1(pg44):
    text = fixture("10cap1").text()
    cols = [pg44.index(c) for c in read_cap_file(text).columns()]
    hits = list(run_search(SearchConfig(seed=tuple(cols[:9]), target=10, require_quantum=True)))
    assert len(hits) == 1
    assert are_equivalent(hits[0], fixture("10cap1").load()) is not None


def _elliptic_quadric():
    s = enumerate_points(3, 4)
    mul = oracles.f4_mul
    pts = []
    for c in s.coords:
        x0, x1, x2, x3 = (int(v) for v in c)
        if mul(x0, x1) ^ mul(x2, x2) ^ mul(x2, x3) ^ mul(2, mul(x3, x3)) == 0:
            pts.append(tuple(int(v) for v in c))
    return Cap.from_points(s, pts)


def test_embed_seed(pg44):
    quadric = _elliptic_quadric()
    assert quadric.n == 17 and quadric.covered == quadric.space.all_mask
    lifted = embed_seed(quadric)
    assert lifted.space is pg44 and lifted.n == 17
    assert lifted.covered != pg44.all_mask
    hyp = pg44.hyperplane_masks[seed_hyperplane(pg44)]
    assert hyp & lifted.mask == lifted.mask
    assert embed_seed(Cap.empty(quadric.space)).n == 0
    with pytest.raises(ValueError):
        embed_seed(PointSet.from_points(quadric.space, [(1, 0, 0, 0), (0, 1, 0, 0), (1, 1, 0, 0)]))
    with pytest.raises(ValueError):
        embed_seed(Cap.empty(pg44))


def test_outside_seed_hyperplane(pg44):
    seed = embed_seed(Cap.from_points(enumerate_points(3, 4), [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]))
    hyp = pg44.hyperplane_masks[seed_hyperplane(pg44)]
    cfg = SearchConfig(seed=seed.points, target=6, restrict_outside_seed_hyperplane=True)
    root = SearchNode.root(cfg)
    assert not root.candidates & hyp
    assert root.candidates.bit_count() == 256
    found = []
    for cap in run_search(cfg):
        assert cap.mask & hyp == seed.mask
        found.append(cap.points)
    outside = [p for p in range(pg44.n_points) if not (hyp >> p) & 1]
    expected = [tuple(sorted(seed.points + pair)) for pair in itertools.combinations(outside, 2)
                if is_cap(seed.points + pair, pg44)]
    assert sorted(found) == sorted(expected)


def test_seed_sizes():
    for n in (37, 39):
        c = SeedConstraint(n, {n: n - 12}, require_quantum=True)
        assert c.min_section == 12
        assert allowed_seed_sizes(c, range(1, 18)) == [13, 15, 17]
    c = SeedConstraint(19, {19: 11})
    assert c.min_section == 8
    assert allowed_seed_sizes(c, range(1, 18)) == list(range(8, 18))
    assert allowed_seed_sizes(SeedConstraint(20, {20: 20}), [1, 5, 9]) == [1, 5, 9]
    with pytest.raises(MissingBoundError):
        allowed_seed_sizes(SeedConstraint(21, {}), [1])
    # shipped table and census constants
    assert allowed_seed_sizes(SeedConstraint(37, require_quantum=True), range(1, 18)) == [13, 15, 17]
    assert sorted(PG34_CAP_CENSUS) == [13, 15, 17]


def test_classify_plane(pg24):
    res = classify(6, pg24, require_quantum=True)
    assert res.count == 1 and res.classes[0].members == 168
    for size in range(1, 7):
        assert classify(size, pg24, method="levels").count == 1
    assert classify(7, pg24).count == 0


def test_classify_solid_four_caps():
    # four points with no three collinear either span the solid or form a plane quadrangle
    res = classify(4, enumerate_points(3, 4), method="levels")
    assert res.count == 2
    assert sorted(rank(c.representative.matrix()) for c in res.classes) == [3, 4]


def test_nonexistence_plane():
    cert = nonexistence(7, SearchConfig(ambient=2))
    assert cert.verdict and cert.hits == 0
    cert = nonexistence(6, SearchConfig(ambient=2, require_quantum=True))
    assert not cert.verdict and cert.hits == 168
    assert sum(cert.per_branch.values()) + 1 == cert.nodes
    assert json.dumps(cert.to_json())


def test_levels_checkpoint_and_workers(tmp_path):
    space = enumerate_points(3, 4)
    ck = str(tmp_path / "levels.jsonl")
    sizes = []
    first = classify(5, space, method="levels", checkpoint=ck, progress=lambda k, n: sizes.append(k))
    assert sizes == [1, 2, 3, 4, 5]
    # the unfiltered sizes 1..4 are stored; a later run starts at size 5
    sizes.clear()
    again = classify(5, space, method="levels", checkpoint=ck, progress=lambda k, n: sizes.append(k))
    assert sizes == [5] and again.count == first.count
    parallel = classify(5, space, method="levels", jobs=2)
    assert parallel.count == first.count
    assert classify(6, space, method="levels", checkpoint=ck, require_quantum=True).count == \
        classify(6, space, method="levels", require_quantum=True).count


# A 12-cap inside the solid x0 = 0 meets every hyperplane of PG(4,4) evenly
# but its code is degenerate; the quantum filter must drop it.
SOLID_12CAP = """PG 4 4
n 12
0 0 0 0 0 0 0 0 0 0 0 0
0 0 0 0 0 0 1 1 1 1 1 1
0 0 1 1 1 1 0 0 1 1 2 2
0 1 0 1 2 3 0 1 0 2 1 2
1 0 0 1 3 2 0 1 2 0 2 1
"""


def test_quantum_filter_requires_spanning():
    from qcaps.caps import parse_cap

    cap = parse_cap(SOLID_12CAP)
    assert hyperplane_parity_ok(cap) and rank(cap.matrix()) == 4
    assert not spans(cap.space, cap.points)
    hits = list(run_search(SearchConfig(seed=cap.points, target=12, require_quantum=True)))
    assert hits == []
    assert len(list(run_search(SearchConfig(seed=cap.points, target=12)))) == 1
