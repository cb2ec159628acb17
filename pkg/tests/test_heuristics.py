import math

import networkx as nx
import numpy as np
import pytest

from sensorplan.coverage_map import CoverageMap
from sensorplan.heuristics import (DijkstraField, dubins_free_heading, dubins_length, dubins_words,
                                   h_dijkstra, h_dubins, h_euclidean)
from sensorplan.lattice import RobotState, robot_successors

from oracles import robot_graph


def test_euclidean_examples(lib):
    s = RobotState(10, 10, 0, 0)
    assert h_euclidean(s, (10, 10), lib) == 0.0
    assert lib.v_eff == pytest.approx(10.0)
    assert h_euclidean(s, (10, 50), lib) == pytest.approx(4.0)


def _random_instances(rng, n, size=40):
    out = []
    while len(out) < n:
        s = RobotState(int(rng.integers(5, size - 5)), int(rng.integers(5, size - 5)),
                       int(rng.integers(0, 16)), int(rng.integers(0, 2)), 0)
        goal = (int(rng.integers(5, size - 5)), int(rng.integers(5, size - 5)))
        if (s.row, s.col) != goal:
            out.append((s, goal))
    return out


def test_euclidean_admissible_against_dijkstra(lib, rng):
    m = CoverageMap.uniform(60, 60, 100)
    checked = 0
    for s, _ in _random_instances(rng, 30, size=60):
        g = robot_graph(lib, m, s, t_max=20)
        dist = nx.single_source_dijkstra_path_length(g, s)
        best = {}
        for st, d in dist.items():
            cell = (st.row, st.col)
            best[cell] = min(d, best.get(cell, math.inf))
        cells = sorted(best)
        for k in rng.choice(len(cells), min(10, len(cells)), replace=False):
            goal = cells[int(k)]
            assert h_euclidean(s, goal, lib) <= best[goal] + 1e-9
            checked += 1
    assert checked >= 250


def test_euclidean_consistent_on_edges(lib, rng):
    m = CoverageMap.uniform(60, 60, 100)
    goal = (30, 30)
    for _ in range(200):
        s = RobotState(int(rng.integers(0, 60)), int(rng.integers(0, 60)), int(rng.integers(0, 16)),
                       int(rng.integers(0, 3)), 0)
        for c, p in robot_successors(s, lib, m):
            assert abs(h_euclidean(s, goal, lib) - h_euclidean(c, goal, lib)) <= p.duration + 1e-9


def _trace(q0, word, segs, r, step=1e-3):
    """Rebuild a Dubins path by integrating its arcs and straight segment."""
    x, y, th = q0
    for kind, length in zip(word, segs):
        L = length * r
        if kind == "S":
            x += L * math.cos(th)
            y += L * math.sin(th)
            continue
        sgn = 1.0 if kind == "L" else -1.0
        cx, cy = x - sgn * r * math.sin(th), y + sgn * r * math.cos(th)
        th2 = th + sgn * length
        x, y = cx + sgn * r * math.sin(th2), cy - sgn * r * math.cos(th2)
        th = th2
    return x, y, th % (2 * math.pi)


def test_dubins_reconstruction(rng):
    for _ in range(100):
        q0 = (*rng.uniform(-50, 50, 2), rng.uniform(0, 2 * math.pi))
        q1 = (*rng.uniform(-50, 50, 2), rng.uniform(0, 2 * math.pi))
        r = float(rng.uniform(2, 25))
        words = dubins_words(q0, q1, r)
        assert words
        for word, segs in words:
            x, y, th = _trace(q0, word, segs, r)
            assert abs(x - q1[0]) < 1e-9 and abs(y - q1[1]) < 1e-9
            d = (th - q1[2]) % (2 * math.pi)
            assert min(d, 2 * math.pi - d) < 1e-9
        assert dubins_length(q0, q1, r) >= math.hypot(q1[0] - q0[0], q1[1] - q0[1]) - 1e-9


def test_dubins_straight_and_behind(lib):
    assert dubins_length((0, 0, 0), (30, 0, 0), 20) == pytest.approx(30)
    s = RobotState(50, 50, 0, 2)
    assert h_dubins(s, (50, 90), lib) == pytest.approx(4.0)
    behind = h_dubins(s, (50, 40), lib, r_min=20)
    assert behind >= math.pi * 20 / lib.v_eff
    assert dubins_free_heading(1, 1, 0, 1, 1, 20) == 0.0
    with pytest.raises(ValueError):
        h_dubins(s, (50, 40), lib, r_min=0)


def test_euclidean_below_dubins(lib, rng):
    for _ in range(200):
        s = RobotState(int(rng.integers(0, 100)), int(rng.integers(0, 100)), int(rng.integers(0, 16)), 1)
        goal = (int(rng.integers(0, 100)), int(rng.integers(0, 100)))
        assert h_euclidean(s, goal, lib) <= h_dubins(s, goal, lib) + 1e-9


def test_dijkstra_field(lib):
    m = CoverageMap.uniform(30, 20, 100)
    goal = (4, 7)
    f = DijkstraField.compute(m, goal)
    assert f.dist[goal] == 0
    assert h_dijkstra(f, RobotState(7, 4, 0, 0), lib) == 0
    ii, jj = np.indices(f.dist.shape)
    di, dj = np.abs(ii - goal[0]), np.abs(jj - goal[1])
    octile = np.maximum(di, dj) + (math.sqrt(2) - 1) * np.minimum(di, dj)
    assert np.allclose(f.dist, octile)
    # triangle inequality over every grid edge
    for a in range(20):
        for b in range(30):
            for da, db in ((0, 1), (1, 0), (1, 1), (1, -1)):
                a2, b2 = a + da, b + db
                if 0 <= a2 < 20 and 0 <= b2 < 30:
                    w = math.hypot(da, db)
                    assert f.dist[a, b] <= f.dist[a2, b2] + w + 1e-9
                    assert f.dist[a2, b2] <= f.dist[a, b] + w + 1e-9
    assert h_dijkstra(f, RobotState(99, 99, 0, 0), lib) == math.inf
    with pytest.raises(IndexError):
        DijkstraField.compute(m, (20, 0))


def test_dijkstra_field_matches_networkx():
    m = CoverageMap.uniform(9, 7, 100, cell_size=2.0)
    g = nx.Graph()
    for i in range(7):
        for j in range(9):
            for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
                if 0 <= i + di < 7 and 0 <= j + dj < 9:
                    g.add_edge((i, j), (i + di, j + dj), weight=2.0 * math.hypot(di, dj))
    ref = nx.single_source_dijkstra_path_length(g, (3, 3))
    f = DijkstraField.compute(m, (3, 3))
    for (i, j), d in ref.items():
        assert f.dist[i, j] == pytest.approx(d)
