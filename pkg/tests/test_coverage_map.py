import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sensorplan.coverage_map import (CoverageMap, MapFormatError, decay, dumps_map, in_coverage_zone,
                                     load_map, loads_map, mark_covered, priority, save_map)

from conftest import random_map


def one_cell(l, a):
    return CoverageMap(np.ones((1, 1), bool), np.array([[l]]), np.array([[a]]))


@pytest.mark.parametrize("l,a,p", [(100, 30, 70), (50, 50, 0), (20, 35, -15)])
def test_priority_examples(l, a, p):
    assert priority(one_cell(l, a), (0, 0)) == p


def test_priority_errors():
    m = CoverageMap(np.array([[True, False]]), np.array([[5, 5]]), np.array([[1, 1]]))
    with pytest.raises(IndexError):
        m.priority((0, 2))
    with pytest.raises(IndexError):
        m.priority((-1, 0))
    with pytest.raises(ValueError):
        m.priority((0, 1))
    # no-coverage cells are normalized to lifetime = age = 0
    assert m.lifetime[0, 1] == 0 and m.age[0, 1] == 0


def test_decay_examples():
    m = one_cell(100, 30)
    assert decay(m, 10).priority((0, 0)) == 60
    assert decay(m, 10).clock == 10
    assert decay(m, 0).same_state(m)
    with pytest.raises(ValueError):
        m.decay(-1)
    with pytest.raises(ValueError):
        m.decay(1.5)


def test_decay_whole_map_sum(rng):
    m = random_map(rng, 5, 5)
    before = sum(m.priority((i, j)) for i in range(5) for j in range(5) if m.coverage[i, j])
    d = m.decay(7)
    after = sum(d.priority((i, j)) for i in range(5) for j in range(5) if d.coverage[i, j])
    assert before - after == 7 * int(m.coverage.sum())
    assert np.array_equal(d.lifetime, m.lifetime)
    assert np.array_equal(d.age[~m.coverage], m.age[~m.coverage])


def test_mark_covered_examples():
    m = one_cell(100, 80)
    c = mark_covered(m, [(0, 0)])
    assert (c.lifetime[0, 0], c.age[0, 0], c.priority((0, 0))) == (100, 0, 100)
    assert mark_covered(c, [(0, 0)]).same_state(c)
    # no-coverage cells are ignored; out-of-bounds is rejected
    nc = CoverageMap(np.array([[False]]), np.array([[0]]), np.array([[0]]))
    assert mark_covered(nc, [(0, 0)]).same_state(nc)
    with pytest.raises(IndexError):
        m.mark_covered([(3, 3)])


def test_cover_then_decay_3x3(rng):
    m = random_map(rng, 3, 3, nc_frac=0.0)
    cells = [(0, 0), (1, 2), (2, 1)]
    d = m.mark_covered(cells).decay(5)
    for c in cells:
        assert d.priority(c) == m.lifetime[c] - 5
    for i in range(3):
        for j in range(3):
            if (i, j) not in cells:
                assert d.priority((i, j)) == m.priority((i, j)) - 5


def test_in_coverage_zone_checkerboard():
    cov = (np.add.outer(np.arange(4), np.arange(4)) % 2) == 0
    m = CoverageMap(cov, np.full((4, 4), 10), np.zeros((4, 4), int))
    assert sum(in_coverage_zone(m, (i, j)) for i in range(4) for j in range(4)) == 8
    assert in_coverage_zone(m, (0, 0)) and not in_coverage_zone(m, (0, 1))
    with pytest.raises(IndexError):
        m.in_coverage_zone((4, 0))


def test_maps_are_read_only(rng):
    m = random_map(rng, 4, 4)
    with pytest.raises(ValueError):
        m.age[0, 0] = 3


def test_cell_of_and_bounds():
    m = CoverageMap.uniform(10, 5, 100, cell_size=2.0)
    assert (m.height, m.width) == (5, 10)
    assert m.cell_of(3.9, 0.1) == (0, 1)
    assert m.contains_point(19.99, 9.99) and not m.contains_point(20.0, 1.0)


maps = st.builds(
    lambda seed, w, h: random_map(np.random.default_rng(seed), w, h),
    st.integers(0, 10_000), st.integers(1, 6), st.integers(1, 6))


@settings(max_examples=60, deadline=None)
@given(maps, st.integers(0, 500), st.integers(0, 500))
def test_decay_composition(m, a, b):
    assert m.decay(a).decay(b).same_state(m.decay(a + b))


@settings(max_examples=60, deadline=None)
@given(maps, st.data())
def test_mark_covered_idempotent_and_zones_fixed(m, data):
    cells = data.draw(st.lists(st.tuples(st.integers(0, m.height - 1), st.integers(0, m.width - 1))))
    once = m.mark_covered(cells)
    assert once.mark_covered(cells).same_state(once)
    assert np.array_equal(once.coverage, m.coverage)
    assert np.array_equal(m.decay(9).coverage, m.coverage)


@settings(max_examples=60, deadline=None)
@given(maps, st.integers(0, 300))
def test_decay_then_priority(m, dt):
    d = m.decay(dt)
    for i in range(m.height):
        for j in range(m.width):
            if m.coverage[i, j]:
                assert d.priority((i, j)) == m.priority((i, j)) - dt


def test_ccmap_round_trip(tmp_path, rng):
    m = random_map(rng, 7, 4, cell_size=0.5).decay(3)
    text = dumps_map(m)
    assert text.splitlines()[0] == "ccmap v1 7 4 0.5 3"
    assert loads_map(text).same_state(m)
    save_map(m, tmp_path / "a.ccmap")
    assert load_map(tmp_path / "a.ccmap").same_state(m)


@pytest.mark.parametrize("text,where", [
    ("", "line 1"),
    ("ccmap v2 1 1 1 0\n5:0\n", "version"),
    ("ccmap v1 2 1 1 0\n5:0\n", "line 2"),
    ("ccmap v1 2 1 1 0\n5:0 x:1\n", "line 2, column 2"),
    ("ccmap v1 1 2 1 0\n5:0\n", "expected 2 rows"),
    ("ccmap v1 1 1 1 0\n5:-1\n", "column 1"),
])
def test_ccmap_rejects_malformed(text, where):
    with pytest.raises(MapFormatError, match=where):
        loads_map(text)
