"""Decoupled planning with sensor history.

The robot path is found first by MHA* over the lattice (time cost). The pan
sequence is then found by uninformed A* over the leveled sensor graph built on
that path's 1 s waypoints, with the history-aware coverage cost.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from .config import PlannerConfig
from .coverage_map import CellIndex, CoverageMap
from .costs import CostModel
from .footprint import relative_pattern
from .heuristics import DijkstraField, h_dijkstra, h_dubins, h_euclidean
from .lattice import RobotState, robot_successors
from .search import SearchResult, astar, mhastar
from .state_spaces import SensorPlanProblem, SensorState, sensor_successors
from .trajectory import Trajectory, assemble, robot_waypoints


class NoPathError(RuntimeError):
    pass


class PlanContext:
    """Read-only planning inputs for one map snapshot, plus footprint caches."""

    def __init__(self, m: CoverageMap, cfg: PlannerConfig = PlannerConfig()):
        self.map = m
        self.cfg = cfg
        self.lib = cfg.library(m.cell_size)
        self.geom = cfg.geometry()
        self.costs = CostModel(m, self.geom, cfg.lam)
        self._fp: Dict[Tuple[float, float, int], np.ndarray] = {}

    def footprint_idx(self, x: float, y: float, psi_bin: int) -> np.ndarray:
        """Flat indices of the clipped footprint at (x, y) with pan bin ``psi_bin``."""
        k = (round(x, 6), round(y, 6), psi_bin % self.geom.n_psi)
        idx = self._fp.get(k)
        if idx is None:
            m = self.map
            row0, col0, dr, dc = relative_pattern(x, y, self.geom.psi_of(psi_bin), self.geom, m.cell_size)
            r, c = dr + row0, dc + col0
            keep = (r >= 0) & (r < m.height) & (c >= 0) & (c < m.width)
            idx = r[keep] * m.width + c[keep]
            idx.setflags(write=False)
            self._fp[k] = idx
        return idx

    def default_psi0(self, start: RobotState) -> int:
        return round(start.heading * self.geom.n_psi / self.lib.params.n_theta) % self.geom.n_psi


@dataclass
class RobotPlan:
    result: SearchResult
    states: List[RobotState] = field(default_factory=list)
    prims: List[int] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.result.found


def plan_robot(start: RobotState, goal: CellIndex, ctx: PlanContext,
               deadline: Optional[float] = None) -> RobotPlan:
    """MHA* over the robot lattice minimizing time to reach the goal cell."""
    m, lib, cfg = ctx.map, ctx.lib, ctx.cfg
    if not m.in_bounds((start.row, start.col)):
        raise ValueError(f"start {start} outside the map")
    if not m.in_bounds(goal):
        raise ValueError(f"goal {goal} outside the map")
    field_ = DijkstraField.compute(m, goal)
    t_max = cfg.t_max

    def succ(s):
        return [(c, p.id) for c, p in robot_successors(s, lib, m) if c.t <= t_max]

    def cost(s, c, pid):
        return float(lib.by_id[pid].duration)

    res = mhastar(
        start, lambda s: (s.row, s.col) == goal, succ, cost,
        h_anchor=lambda s: h_euclidean(s, goal, lib),
        h_inadmissible=[lambda s: h_dubins(s, goal, lib, cfg.r_min, cfg.dubins_final_headings),
                        lambda s: h_dijkstra(field_, s, lib)],
        w1=cfg.w1, w2=cfg.w2, deadline=deadline)
    if not res.found:
        return RobotPlan(res)
    return RobotPlan(res, list(res.path), list(res.edges))


@dataclass
class SensorPlan:
    psis: List[int]
    cost: float  # unshifted
    result: SearchResult


def _pan_key(psi0: int, n_psi: int):
    def key(s: SensorState):
        d = (s.psi - psi0) % n_psi
        return (s.level, min(d, n_psi - d), s.psi, s.history)
    return key


def plan_sensor(waypoints: Sequence[Tuple[float, float, float, int]], psi0: int, H: int,
                ctx: PlanContext) -> SensorPlan:
    """Cost-optimal pan sequence for fixed robot waypoints with an H-step history.

    Waypoints are (x, y, theta, t) with 1 s spacing. The first waypoint's pan is
    fixed to ``psi0`` and is not charged.
    """
    cfg = ctx.cfg
    if H < 0 or H > cfg.h_max:
        raise ValueError(f"H must lie in [0, {cfg.h_max}]")
    if not waypoints:
        raise ValueError("robot trajectory is empty")
    n_psi = ctx.geom.n_psi
    problem = SensorPlanProblem(tuple((w[0], w[1], w[2], int(w[3])) for w in waypoints), psi0 % n_psi, H,
                                n_psi, cfg.pan_limits)
    costs = ctx.costs
    shift = costs.shift
    hist_cache: Dict[Tuple[int, Tuple[int, ...]], FrozenSet[int]] = {}

    def fp(level, psi):
        x, y, _, _ = problem.waypoints[level]
        return ctx.footprint_idx(x, y, psi)

    def hist_set(s: SensorState):
        if not s.history:
            return frozenset()
        k = (s.level, s.history)
        got = hist_cache.get(k)
        if got is None:
            n = len(s.history)
            cells = set()
            for i, q in enumerate(s.history):
                cells.update(fp(s.level - n + i, q).tolist())
            got = hist_cache[k] = frozenset(cells)
        return got

    def raw_cost(c: SensorState) -> float:
        return costs.eq2_flat(fp(c.level, c.psi), hist_set(c))

    last = problem.last_level
    res = astar(problem.start(), lambda s: s.level == last,
                lambda s: [(c, None) for c in sensor_successors(s, problem)],
                lambda s, c, e: raw_cost(c) + shift,
                key=_pan_key(problem.psi0, n_psi))
    if not res.found:  # pan limits can make the DAG a dead end
        raise NoPathError("no feasible pan sequence")
    states = res.path
    total = math.fsum(raw_cost(c) for c in states[1:])
    return SensorPlan([s.psi for s in states], total, res)


def splash(start: RobotState, goal: CellIndex, ctx: PlanContext, H: Optional[int] = None,
           psi0: Optional[int] = None, deadline: Optional[float] = None) -> Trajectory:
    """Robot MHA* then history-aware sensor A*; raises NoPathError if the robot search fails."""
    H = ctx.cfg.H if H is None else H
    psi0 = ctx.default_psi0(start) if psi0 is None else psi0
    t0 = time.perf_counter()
    if deadline is None and ctx.cfg.robot_timeout > 0:
        deadline = t0 + ctx.cfg.robot_timeout
    rp = plan_robot(start, goal, ctx, deadline)
    t1 = time.perf_counter()
    if not rp.found:
        why = "timed out" if rp.result.timed_out else "exhausted"
        raise NoPathError(f"robot search {why} after {rp.result.expansions} expansions")
    wps, _ = robot_waypoints(start, rp.prims, ctx.lib)
    sp = plan_sensor([w[:4] for w in wps], psi0, H, ctx)
    t2 = time.perf_counter()
    meta = {"t_robot": t1 - t0, "t_sensor": t2 - t1, "robot_expansions": rp.result.expansions,
            "sensor_expansions": sp.result.expansions, "sensor_g": sp.result.cost, "H": H}
    return assemble(start, rp.prims, sp.psis, ctx.lib, ctx.geom, ctx.map, sp.cost, meta)
