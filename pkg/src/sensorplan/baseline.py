"""Joint-space MHA* baseline with a weighted sum of motion time and coverage cost."""

from __future__ import annotations

import math
import time
from typing import Optional

from .coverage_map import CellIndex
from .costs import BASELINE, edge_cost_joint
from .heuristics import DijkstraField, h_dijkstra, h_dubins, h_euclidean
from .lattice import RobotState
from .search import mhastar
from .splash import NoPathError, PlanContext
from .state_spaces import JointState, joint_state_key, joint_successors
from .trajectory import Trajectory, assemble


def joint_baseline(start: RobotState, goal: CellIndex, ctx: PlanContext, psi0: Optional[int] = None,
                   timeout: Optional[float] = None, max_expansions: Optional[int] = None) -> Trajectory:
    """MHA* directly in the joint graph; raises NoPathError on timeout or exhaustion."""
    cfg = ctx.cfg
    lib, geom, m, costs = ctx.lib, ctx.geom, ctx.map, ctx.costs
    params = cfg.cost_params()
    psi0 = ctx.default_psi0(start) if psi0 is None else psi0
    timeout = cfg.baseline_timeout if timeout is None else timeout
    if max_expansions is None and cfg.baseline_max_expansions > 0:
        max_expansions = cfg.baseline_max_expansions
    t0 = time.perf_counter()
    deadline = t0 + timeout if timeout and math.isfinite(timeout) else None
    field_ = DijkstraField.compute(m, goal)
    shift = costs.shift
    # every tick costs at least this much, so time lower bounds scale by it
    per_tick = params.w_motion + params.w_sensor * costs.min_shifted
    t_max = cfg.t_max

    def succ(s):
        return joint_successors(s, lib, geom, m, t_max, cfg.pan_limits)

    def cost(s, c, e):
        raw = costs.eq1_flat(ctx.footprint_idx(e.x, e.y, e.psi))
        return edge_cost_joint(raw + shift, params, BASELINE)

    def lift(hr):
        def h(s: JointState):
            if s.on_lattice:
                return per_tick * hr(s.robot)
            p = lib.by_id[s.prim]
            return per_tick * ((p.duration - s.tick) + hr(lib.apply(s.robot, p)))
        return h

    res = mhastar(
        JointState(start, psi0 % geom.n_psi),
        lambda s: s.on_lattice and (s.robot.row, s.robot.col) == goal, succ, cost,
        h_anchor=lift(lambda r: h_euclidean(r, goal, lib)),
        h_inadmissible=[lift(lambda r: h_dubins(r, goal, lib, cfg.r_min, cfg.dubins_final_headings)),
                        lift(lambda r: h_dijkstra(field_, r, lib))],
        w1=cfg.w1, w2=cfg.w2, key=joint_state_key, deadline=deadline, max_expansions=max_expansions)
    wall = time.perf_counter() - t0
    if not res.found:
        why = "timed out" if res.timed_out else "exhausted"
        err = NoPathError(f"joint baseline {why} after {res.expansions} expansions")
        err.expansions = res.expansions
        err.wall_time = wall
        raise err
    edges = res.edges
    prims = [e.prim for e in edges if e.tick == lib.by_id[e.prim].duration]
    psis = [res.path[0].psi] + [e.psi for e in edges]
    raw = math.fsum(costs.eq1_flat(ctx.footprint_idx(e.x, e.y, e.psi)) for e in edges)
    meta = {"baseline_g": res.cost, "expansions": res.expansions, "wall": wall}
    return assemble(start, prims, psis, lib, geom, m, raw, meta)
