"""Robot-space heuristics (time lower bounds or estimates, in seconds).

The Euclidean heuristic anchors MHA*; Dubins and grid-Dijkstra distances drive
the two inadmissible queues.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .coverage_map import CellIndex, CoverageMap
from .lattice import PrimitiveLibrary, RobotState

TWO_PI = 2.0 * math.pi
WORDS = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


def _mod2pi(a: float) -> float:
    return a % TWO_PI


def h_euclidean(s: RobotState, goal: CellIndex, lib: PrimitiveLibrary) -> float:
    gx, gy = (goal[1] + 0.5) * lib.params.cell_size, (goal[0] + 0.5) * lib.params.cell_size
    x, y = lib.position(s)
    return math.hypot(gx - x, gy - y) / lib.v_eff


# --- Dubins ---------------------------------------------------------------

def dubins_words(q0: Tuple[float, float, float], q1: Tuple[float, float, float], r: float
                 ) -> List[Tuple[str, Tuple[float, float, float]]]:
    """All feasible Dubins words as (word, (t, p, q)); segment lengths are t*r, p*r, q*r."""
    dx, dy = q1[0] - q0[0], q1[1] - q0[1]
    d = math.hypot(dx, dy) / r
    th = math.atan2(dy, dx) if d > 0 else 0.0
    a = _mod2pi(q0[2] - th)
    b = _mod2pi(q1[2] - th)
    sa, sb, ca, cb = math.sin(a), math.sin(b), math.cos(a), math.cos(b)
    cab = math.cos(a - b)
    out = []

    tmp = 2 + d * d - 2 * cab + 2 * d * (sa - sb)
    if tmp >= 0:
        ang = math.atan2(cb - ca, d + sa - sb)
        out.append(("LSL", (_mod2pi(-a + ang), math.sqrt(tmp), _mod2pi(b - ang))))
    tmp = 2 + d * d - 2 * cab + 2 * d * (sb - sa)
    if tmp >= 0:
        ang = math.atan2(ca - cb, d - sa + sb)
        out.append(("RSR", (_mod2pi(a - ang), math.sqrt(tmp), _mod2pi(-b + ang))))
    tmp = -2 + d * d + 2 * cab + 2 * d * (sa + sb)
    if tmp >= 0:
        p = math.sqrt(tmp)
        ang = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
        out.append(("LSR", (_mod2pi(-a + ang), p, _mod2pi(-b + ang))))
    tmp = -2 + d * d + 2 * cab - 2 * d * (sa + sb)
    if tmp >= 0:
        p = math.sqrt(tmp)
        ang = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
        out.append(("RSL", (_mod2pi(a - ang), p, _mod2pi(b - ang))))
    tmp = (6 - d * d + 2 * cab + 2 * d * (sa - sb)) / 8
    if abs(tmp) <= 1:
        p = _mod2pi(TWO_PI - math.acos(tmp))
        t = _mod2pi(a - math.atan2(ca - cb, d - sa + sb) + p / 2)
        out.append(("RLR", (t, p, _mod2pi(a - b - t + p))))
    tmp = (6 - d * d + 2 * cab + 2 * d * (sb - sa)) / 8
    if abs(tmp) <= 1:
        p = _mod2pi(TWO_PI - math.acos(tmp))
        t = _mod2pi(-a - math.atan2(ca - cb, d + sa - sb) + p / 2)
        out.append(("LRL", (t, p, _mod2pi(b - a - t + p))))
    return out


def dubins_length(q0, q1, r: float) -> float:
    words = dubins_words(q0, q1, r)
    return min(sum(seg) for _, seg in words) * r


def dubins_free_heading(x: float, y: float, theta: float, gx: float, gy: float, r: float,
                        n_final: int = 16) -> float:
    """Shortest Dubins length to (gx, gy) over ``n_final`` sampled final headings."""
    if x == gx and y == gy:
        return 0.0
    return min(dubins_length((x, y, theta), (gx, gy, k * TWO_PI / n_final), r) for k in range(n_final))


def h_dubins(s: RobotState, goal: CellIndex, lib: PrimitiveLibrary, r_min: float = 20.0,
             n_final: int = 16) -> float:
    if r_min <= 0:
        raise ValueError("r_min must be positive")
    cs = lib.params.cell_size
    x, y = lib.position(s)
    length = _dubins_cached(round(x, 9), round(y, 9), lib.theta(s), (goal[1] + 0.5) * cs,
                            (goal[0] + 0.5) * cs, float(r_min), n_final)
    return length / lib.v_eff


@lru_cache(maxsize=500_000)
def _dubins_cached(x, y, th, gx, gy, r, n_final):
    return dubins_free_heading(x, y, th, gx, gy, r, n_final)


# --- grid Dijkstra --------------------------------------------------------

@lru_cache(maxsize=16)
def _grid_graph(height: int, width: int, cell_size: float):
    rows, cols, w = [], [], []
    idx = np.arange(height * width).reshape(height, width)
    for di, dj in ((0, 1), (1, 0), (1, 1), (1, -1)):
        i0, i1 = max(0, -di), height - max(0, di)
        j0, j1 = max(0, -dj), width - max(0, dj)
        a = idx[i0:i1, j0:j1].ravel()
        b = idx[i0 + di:i1 + di, j0 + dj:j1 + dj].ravel()
        step = cell_size * math.hypot(di, dj)
        rows += [a, b]
        cols += [b, a]
        w += [np.full(a.size, step), np.full(a.size, step)]
    n = height * width
    return coo_matrix((np.concatenate(w), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)).tocsr()


@dataclass(frozen=True, eq=False)
class DijkstraField:
    goal: CellIndex
    dist: np.ndarray  # metres to the goal cell center, +inf where unreached

    @classmethod
    def compute(cls, m: CoverageMap, goal: CellIndex) -> "DijkstraField":
        if not m.in_bounds(goal):
            raise IndexError(f"goal {goal} outside map")
        graph = _grid_graph(m.height, m.width, float(m.cell_size))
        d = dijkstra(graph, directed=False, indices=goal[0] * m.width + goal[1])
        dist = d.reshape(m.height, m.width)
        dist.setflags(write=False)
        return cls(goal, dist)


def h_dijkstra(field: DijkstraField, s: RobotState, lib: PrimitiveLibrary) -> float:
    if not (0 <= s.row < field.dist.shape[0] and 0 <= s.col < field.dist.shape[1]):
        return math.inf
    return float(field.dist[s.row, s.col]) / lib.v_eff
