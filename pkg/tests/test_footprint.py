import math

import numpy as np
import pytest

from sensorplan.coverage_map import CoverageMap
from sensorplan.footprint import SensorGeometry, footprint_cells, footprint_overlap

from oracles import point_oracle, shapely_oracle

GEOM = SensorGeometry()


def test_axis_aligned_3x2_is_six_cells():
    m = CoverageMap.uniform(10, 10, 100)
    g = SensorGeometry(rect_length=3.0, rect_width=2.0, offset=0.0)
    fp = footprint_cells(m, 4.5, 5.0, 0.0, g)
    assert fp.cells == {(r, c) for r in (4, 5) for c in (3, 4, 5)}


def test_quarter_turn_symmetry():
    m = CoverageMap.uniform(30, 30, 100)
    g = SensorGeometry(rect_length=3.0, rect_width=2.0, offset=4.0)
    a = footprint_cells(m, 15.0, 15.0, 0.0, g)
    b = footprint_cells(m, 15.0, 15.0, math.pi / 2, g)
    assert len(a) == len(b)
    # a quarter turn about the cell corner (15, 15) maps cell (r, c) to (c, 29 - r)
    assert b.cells == {(c, 29 - r) for r, c in a.cells}


def test_pi_over_six_matches_oracles():
    m = CoverageMap.uniform(20, 20, 100)
    fp = footprint_cells(m, 8.3, 9.1, math.pi / 6, GEOM)
    assert fp.cells == point_oracle(20, 20, 8.3, 9.1, math.pi / 6, GEOM)
    assert fp.cells == shapely_oracle(20, 20, 8.3, 9.1, math.pi / 6, GEOM)


def test_random_poses_match_shapely(rng):
    m = CoverageMap.uniform(20, 20, 100)
    for _ in range(40):
        x, y = rng.uniform(0, 20, 2)
        psi = rng.uniform(0, 2 * math.pi)
        assert footprint_cells(m, x, y, psi, GEOM).cells == shapely_oracle(20, 20, x, y, psi, GEOM)


def test_theta_does_not_change_cells():
    m = CoverageMap.uniform(20, 20, 100)
    a = footprint_cells(m, 10.5, 10.5, 1.0, GEOM, theta=0.0)
    b = footprint_cells(m, 10.5, 10.5, 1.0, GEOM, theta=2.5)
    assert a.cells == b.cells and b.pose == (10.5, 10.5, 2.5, 1.0)


def test_translation_equivariance(rng):
    m = CoverageMap.uniform(40, 40, 100)
    for _ in range(20):
        x, y = rng.uniform(12, 20, 2)
        psi = rng.uniform(0, 2 * math.pi)
        di, dj = rng.integers(-5, 6, 2)
        a = footprint_cells(m, x, y, psi, GEOM).cells
        b = footprint_cells(m, x + dj, y + di, psi, GEOM).cells
        assert b == {(r + di, c + dj) for r, c in a}


def test_cell_count_bound(rng):
    m = CoverageMap.uniform(30, 30, 100)
    bound = math.ceil(GEOM.rect_length + 1) * math.ceil(GEOM.rect_width + 1) * 2
    sizes = []
    for _ in range(100):
        x, y = rng.uniform(10, 20, 2)
        fp = footprint_cells(m, x, y, rng.uniform(0, 2 * math.pi), GEOM)
        sizes.append(len(fp))
        assert len(fp) <= bound
        assert len(fp) <= GEOM.max_cells(1.0)
    # never fewer cells than the rectangle's area; boundary cells add up to ~20 more
    assert min(sizes) >= GEOM.rect_length * GEOM.rect_width
    assert max(sizes) <= GEOM.rect_length * GEOM.rect_width + 2 * (GEOM.rect_length + GEOM.rect_width) + 4


def test_clipping_at_border():
    m = CoverageMap.uniform(10, 10, 100)
    fp = footprint_cells(m, 0.5, 0.5, math.pi, GEOM)  # looking off the map
    assert len(fp) == 0
    fp = footprint_cells(m, 9.5, 5.5, 0.0, GEOM)
    assert all(0 <= r < 10 and 0 <= c < 10 for r, c in fp.cells)
    full = point_oracle(10, 20, 9.5, 5.5, 0.0, GEOM)
    assert fp.cells == {(r, c) for r, c in full if c < 10}


def test_robot_off_map_is_error():
    m = CoverageMap.uniform(10, 10, 100)
    with pytest.raises(ValueError):
        footprint_cells(m, -0.1, 5.0, 0.0, GEOM)
    with pytest.raises(ValueError):
        footprint_cells(m, 5.0, 10.0, 0.0, GEOM)


def test_overlap_examples():
    m = CoverageMap.uniform(40, 40, 100)
    a = footprint_cells(m, 10.5, 10.5, 0.0, GEOM)
    assert footprint_overlap(a, a) == a.cells
    far = footprint_cells(m, 30.5, 30.5, 0.0, GEOM)
    assert footprint_overlap(a, far) == frozenset()
    half = footprint_cells(m, 13.5, 10.5, 0.0, GEOM)
    expected = {c for c in a.cells if any(c == d for d in half.cells)}
    assert footprint_overlap(a, half) == expected
    assert 0 < len(expected) < len(a)


def test_geometry_validation():
    with pytest.raises(ValueError):
        SensorGeometry(rect_length=0.0)
    with pytest.raises(ValueError):
        SensorGeometry(n_psi=0)
    g = SensorGeometry(n_psi=16)
    assert g.psi_step == pytest.approx(2 * math.pi / 16) and g.psi_rate == g.psi_step
    assert g.psi_of(17) == pytest.approx(g.psi_step)


def test_footprint_arrays_are_stable():
    m = CoverageMap.uniform(20, 20, 100)
    a = footprint_cells(m, 7.25, 3.75, 0.4, GEOM)
    b = footprint_cells(m, 7.25, 3.75, 0.4, GEOM)
    assert np.array_equal(a.rows, b.rows) and np.array_equal(a.cols, b.cols)
