import itertools
import logging

import pytest
from hypothesis import given, settings, strategies as st

from qcaps.caps import (
    Cap,
    CapFormatError,
    IllegalExtension,
    NotACapError,
    PointSet,
    add_point,
    extension_points,
    is_cap,
    is_complete,
    parse_cap,
    parse_points,
    read_cap_file,
    write_cap,
)
from qcaps.geometry import enumerate_points

from oracles import det3


BASIS = [(1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 1, 0), (0, 0, 0, 0, 1)]


def test_is_cap_examples(pg44):
    assert is_cap(BASIS, pg44)
    assert not is_cap([(1, 0, 0, 0, 0), (0, 1, 0, 0, 0), (1, 1, 0, 0, 0)], pg44)
    assert is_cap([], pg44)
    with pytest.raises(ValueError):
        is_cap([0, 0], pg44)


def test_is_cap_matches_determinants(pg24):
    coords = [tuple(int(x) for x in c) for c in pg24.coords]
    for tri in itertools.combinations(range(21), 3):
        assert is_cap(tri, pg24) == (det3(*(coords[i] for i in tri)) != 0)


def test_add_point(pg44):
    cap = Cap.from_points(pg44, BASIS[:2])
    with pytest.raises(IllegalExtension):
        add_point(cap, (1, 1, 0, 0, 0))
    with pytest.raises(IllegalExtension):
        add_point(cap, BASIS[0])
    bigger = add_point(cap, BASIS[2])
    assert bigger.n == 3
    # three secant lines of 5 points, pairwise meeting in a cap point
    assert bigger.covered.bit_count() == 3 * 5 - 3
    with pytest.raises(NotACapError):
        Cap.from_points(pg44, BASIS[:2] + [(1, 1, 0, 0, 0)])


def test_completeness(pg24, fixture_caps):
    hyperoval = Cap.from_points(pg24, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1), (1, 2, 3), (1, 3, 2)])
    assert is_complete(hyperoval)
    assert not is_complete(Cap.from_points(pg24, [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)]))
    with pytest.raises(ValueError):
        is_complete(Cap.empty(pg24))
    for name, cap in fixture_caps.items():
        assert is_complete(cap) == (not name.startswith(("10", "12")))
        assert extension_points(cap) == ([] if is_complete(cap) else extension_points(cap))


def test_extension_points_are_legal(fixture_caps):
    cap = fixture_caps["10cap1"]
    ext = extension_points(cap)
    assert ext
    for p in ext[:20]:
        assert is_cap(cap.points + (p,), cap.space)


TEXT = """# sample
PG 4 4
n 3
1 0 0
0 1 0
0 0 1
0 0 0
0 0 0
"""


def test_parse_and_write(pg44):
    cap = parse_cap(TEXT)
    assert cap.n == 3
    assert write_cap(cap).splitlines()[:2] == ["PG 4 4", "n 3"]
    assert parse_cap(write_cap(cap)).same_points(cap)
    assert write_cap(cap, "a\nb").startswith("# a\n# b\n")


def test_multi_block_layout():
    text = "PG 2 4\nn 4\n1 0\n0 1\n0 0\n0 1\n0 1\n1 1\n"
    ps = parse_points(text)
    assert [tuple(int(x) for x in ps.space.coords[p]) for p in ps.points] == sorted([(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)])


@pytest.mark.parametrize(
    "text",
    [
        "PG 4 4\n1 0\n",
        "n 2\nPG 4 4\n",
        "PG 2 4\nn 2\n1 0\n0 1\n",
        "PG 2 4\nn 3\n1 0\n0 1\n0 0\n",
        "PG 2 4\nn 2\n1 0\n0 x\n0 0\n",
        "PG 2 4\nn 2\n1 0\n0 5\n0 0\n",
        "PG 2 4\nn 2\n0 0\n0 1\n0 0\n",
        "PG 2 4\nn 2\n1 2\n0 0\n0 0\n",
        "PG 2 3\nn 1\n1\n0\n0\n",
        "PG 2 4\nn 2\n1 0 0\n0 1\n0 0\n",
    ],
)
def test_format_errors(text):
    with pytest.raises(CapFormatError):
        parse_points(text)


def test_collinear_file_is_not_a_cap():
    with pytest.raises(NotACapError):
        parse_cap("PG 2 4\nn 3\n1 0 1\n0 1 1\n0 0 0\n")


def test_unnormalized_column_warns(caplog):
    with caplog.at_level(logging.WARNING):
        ps = parse_points("PG 2 4\nn 1\n2\n3\n0\n")
    assert "normalized" in caplog.text
    assert tuple(int(x) for x in ps.space.coords[ps.points[0]]) == (1, 2, 0)


def test_header_matches_matrix():
    cf = read_cap_file(TEXT)
    assert (cf.dim, cf.q, cf.n) == (4, 4, 3)
    assert cf.matrix.shape == (5, 3)


@st.composite
def random_caps(draw, dim=4):
    space = enumerate_points(dim, 4)
    cap = Cap.empty(space)
    size = draw(st.integers(0, 15))
    for _ in range(size):
        ext = extension_points(cap)
        if not ext:
            break
        cap = add_point(cap, draw(st.sampled_from(ext)))
    return cap


@settings(max_examples=60, deadline=None)
@given(random_caps())
def test_round_trip(cap):
    back = parse_cap(write_cap(cap))
    assert back.same_points(cap)
    assert back.covered == cap.covered
    # canonical files are a fixed point
    assert write_cap(back) == write_cap(cap)


@settings(max_examples=60, deadline=None)
@given(random_caps())
def test_covered_matches_recomputation(cap):
    space = cap.space
    expected = cap.mask
    for a, b in itertools.combinations(cap.points, 2):
        expected |= space.line_masks[space.line_of[a, b]]
    assert cap.covered == expected
    assert is_cap(cap.points, space)


def test_pointset_rejects_duplicates(pg44):
    with pytest.raises(ValueError):
        PointSet(pg44, (1, 1))
