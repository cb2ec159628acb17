"""Decoupled initialization followed by local iterative tunneling in the joint space.

Each refinement iteration is a fresh uninformed A* from the start joint state in
which a generated state is queued only if its level (edge distance from the
initial path, as discovered so far) does not exceed the iteration number. Level
updates keep the smallest value seen; states on the initial path stay at 0.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .coverage_map import CellIndex
from .lattice import RobotState
from .search import CHECK_EVERY, SearchResult
from .splash import PlanContext, splash
from .state_spaces import JointEdge, JointState, joint_state_key, joint_successors
from .trajectory import Trajectory, assemble

TRACE_FIELDS = ("iteration", "cost", "expansions", "wall_ms", "tunnel_states", "cost_unshifted")


@dataclass
class IterationRecord:
    iteration: int
    cost: float  # best-so-far shifted g(goal)
    cost_unshifted: float  # best-so-far coverage cost without the per-tick shift
    iteration_cost: float  # this iteration's g(goal), inf if none
    expansions: int
    wall_ms: float
    tunnel_states: int
    gate_rejections: int
    max_expanded_level: int


@dataclass
class RefinementTrace:
    records: List[IterationRecord] = field(default_factory=list)
    shift: float = 0.0
    initial_cost: float = math.inf
    stopped: str = ""

    def costs(self) -> List[float]:
        return [r.cost for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_FIELDS)
        for r in self.records:
            w.writerow([r.iteration, repr(r.cost), r.expansions, f"{r.wall_ms:.3f}", r.tunnel_states,
                        repr(r.cost_unshifted)])
        return buf.getvalue()


@dataclass
class TunnelResult:
    result: SearchResult
    gate_rejections: int = 0
    max_expanded_level: int = -1
    aborted: bool = False


def reference_states(traj: Trajectory, ctx: PlanContext) -> Tuple[List[JointState], List[JointEdge]]:
    """Joint states (and 1 s edges) visited by a trajectory built from lattice primitives."""
    lib = ctx.lib
    psis = traj.psis
    if traj.primitives:
        s = traj.primitives[0][0]
    else:
        st = traj.steps[0]
        s = _lattice_state_at(st, ctx)
    states = [JointState(s, psis[0])]
    edges: List[JointEdge] = []
    k = 1
    for anchor, pid in traj.primitives:
        p = lib.by_id[pid]
        ax, ay = lib.position(anchor)
        for tick in range(1, p.duration + 1):
            px, py, th = p.poses_1s[tick - 1]
            q = psis[k]
            k += 1
            edges.append(JointEdge(pid, tick, ax + px, ay + py, th, q))
            if tick == p.duration:
                states.append(JointState(lib.apply(anchor, p), q))
            else:
                states.append(JointState(anchor, q, pid, tick))
    return states, edges


def _lattice_state_at(step, ctx) -> RobotState:
    lib = ctx.lib
    row, col = ctx.map.cell_of(step.x, step.y)
    n = lib.params.n_theta
    heading = round(step.theta / (2 * math.pi / n)) % n
    speed = min(range(len(lib.params.speeds)), key=lambda i: abs(lib.params.speeds[i] - step.v))
    return RobotState(col, row, heading, speed, step.t)


class _Refiner:
    """Shared state of one refinement run: edge costs, goal test and the level table."""

    def __init__(self, ctx: PlanContext, ref: List[JointState], ref_edges: List[JointEdge], goal: CellIndex):
        self.ctx = ctx
        cfg = ctx.cfg
        self.shift = ctx.costs.shift
        self.ref = ref
        self.start = ref[0]
        end = ref[-1]
        self.t_max = min(cfg.t_max, end.t + cfg.split_horizon_slack)
        if cfg.split_strict_goal:
            gk = joint_state_key(end)
            self.is_goal = lambda s: joint_state_key(s) == gk
        else:
            self.is_goal = lambda s: s.prim < 0 and (s.robot.row, s.robot.col) == goal
        self.levels: Dict[tuple, int] = {}
        self.seed(ref)
        self.ref_cost = sum(self.edge_cost(e) for e in ref_edges)

    def seed(self, path: List[JointState]):
        for s in path:
            self.levels[joint_state_key(s)] = 0

    def raw_cost(self, e: JointEdge) -> float:
        return self.ctx.costs.eq1_flat(self.ctx.footprint_idx(e.x, e.y, e.psi))

    def edge_cost(self, e: JointEdge) -> float:
        return self.raw_cost(e) + self.shift

    def tunnel_size(self, iteration: int) -> int:
        return sum(1 for v in self.levels.values() if v <= iteration)


def tunnel_astar(refiner: _Refiner, iteration: int, deadline: Optional[float] = None,
                 on_expand: Optional[Callable[[JointState, int], None]] = None,
                 h: Optional[Callable[[JointState], float]] = None) -> TunnelResult:
    """One gated A* over the joint graph; ``h`` defaults to 0."""
    ctx = refiner.ctx
    lib, geom, m = ctx.lib, ctx.geom, ctx.map
    pan_limits = ctx.cfg.pan_limits
    levels = refiner.levels
    hf = h or (lambda s: 0.0)
    t0 = time.perf_counter()
    start = refiner.start
    k0 = joint_state_key(start)
    states = {k0: start}
    g = {k0: 0.0}
    bp: Dict[tuple, tuple] = {k0: (None, None)}
    pushed = {k0: 0.0}
    closed = set()
    open_ = [(hf(start), -0.0, k0)]
    expansions = rejections = 0
    max_level = -1
    t_max = refiner.t_max
    is_goal = refiner.is_goal
    edge_cost = refiner.edge_cost
    while open_:
        f, neg_g, k = heapq.heappop(open_)
        if k in closed or -neg_g != g[k]:
            continue
        s = states[k]
        if is_goal(s):
            path, edges = [], []
            kk = k
            while kk is not None:
                path.append(states[kk])
                parent, e = bp[kk]
                if parent is not None:
                    edges.append(e)
                kk = parent
            path.reverse()
            edges.reverse()
            res = SearchResult(True, path, edges, g[k], expansions, time.perf_counter() - t0)
            return TunnelResult(res, rejections, max_level)
        closed.add(k)
        expansions += 1
        lv = levels[k]
        if lv > max_level:
            max_level = lv
        if on_expand is not None:
            on_expand(s, lv)
        if deadline is not None and expansions % CHECK_EVERY == 0 and time.perf_counter() >= deadline:
            return TunnelResult(SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0,
                                             timed_out=True), rejections, max_level, aborted=True)
        gs = g[k]
        for child, e in joint_successors(s, lib, geom, m, t_max, pan_limits):
            kc = joint_state_key(child)
            if kc in closed:
                continue
            old = levels.get(kc)
            if old is None or lv + 1 < old:
                levels[kc] = lv + 1
            gc = gs + edge_cost(e)
            if gc < g.get(kc, math.inf):
                g[kc] = gc
                bp[kc] = (k, e)
                states[kc] = child
            if levels[kc] <= iteration:
                gk = g[kc]
                if pushed.get(kc) != gk:
                    pushed[kc] = gk
                    heapq.heappush(open_, (gk + hf(states[kc]), -gk, kc))
            else:
                rejections += 1
    res = SearchResult(False, expansions=expansions, wall_time=time.perf_counter() - t0)
    return TunnelResult(res, rejections, max_level)


def _to_trajectory(path: List[JointState], edges: List[JointEdge], ctx: PlanContext, meta) -> Trajectory:
    start = path[0].robot
    prims = [e.prim for e in edges if e.tick == ctx.lib.by_id[e.prim].duration]
    psis = [path[0].psi] + [e.psi for e in edges]
    raw = math.fsum(ctx.costs.eq1_flat(ctx.footprint_idx(e.x, e.y, e.psi)) for e in edges)
    return assemble(start, prims, psis, ctx.lib, ctx.geom, ctx.map, raw, meta)


def local_iterative_tunneling(pi_i: Trajectory, t_budget: float, ctx: PlanContext,
                              goal: Optional[CellIndex] = None,
                              on_expand: Optional[Callable[[JointState, int, int], None]] = None,
                              max_iterations: Optional[int] = None) -> Tuple[Trajectory, RefinementTrace]:
    """Refine ``pi_i`` until ``t_budget`` seconds are spent or the tunnel stops growing.

    ``on_expand(state, level, iteration)`` observes every expansion.
    """
    t_start = time.perf_counter()
    deadline = t_start + t_budget if math.isfinite(t_budget) else None
    ref, ref_edges = reference_states(pi_i, ctx)
    if goal is None:
        last = ref[-1].robot
        goal = (last.row, last.col)
    refiner = _Refiner(ctx, ref, ref_edges, goal)
    trace = RefinementTrace(shift=refiner.shift, initial_cost=refiner.ref_cost)
    best_cost = refiner.ref_cost
    best_raw = math.fsum(refiner.raw_cost(e) for e in ref_edges)
    best_path: Optional[Tuple[List[JointState], List[JointEdge]]] = None
    cap = ctx.cfg.split_max_iterations if max_iterations is None else max_iterations
    iteration = 1
    while True:
        if deadline is not None and time.perf_counter() >= deadline:
            trace.stopped = "budget"
            break
        if cap and iteration > cap:
            trace.stopped = "max_iterations"
            break
        it0 = time.perf_counter()
        cb = None if on_expand is None else (lambda s, lv, _it=iteration: on_expand(s, lv, _it))
        tr = tunnel_astar(refiner, iteration, deadline, cb)
        if tr.aborted:
            trace.stopped = "budget"
            break
        res = tr.result
        if res.found and res.cost < best_cost:
            best_cost = res.cost
            best_raw = math.fsum(refiner.raw_cost(e) for e in res.edges)
            best_path = (res.path, res.edges)
        trace.records.append(IterationRecord(
            iteration, best_cost, best_raw, res.cost if res.found else math.inf, res.expansions,
            (time.perf_counter() - it0) * 1e3, refiner.tunnel_size(iteration), tr.gate_rejections,
            tr.max_expanded_level))
        if tr.gate_rejections == 0:
            trace.stopped = "fixed_point"
            break
        if ctx.cfg.split_reanchor and best_path is not None:
            refiner.seed(best_path[0])
        iteration += 1
    if best_path is None:
        out = pi_i
    else:
        out = _to_trajectory(best_path[0], best_path[1], ctx, {})
    out.meta = dict(pi_i.meta)
    out.meta.update({"split_iterations": len(trace.records), "split_g": best_cost, "split_shift": refiner.shift,
                     "refine_time": time.perf_counter() - t_start})
    return out, trace


def split(start: RobotState, goal: CellIndex, ctx: PlanContext, T_overall: Optional[float] = None,
          psi0: Optional[int] = None, on_expand=None,
          max_iterations: Optional[int] = None) -> Tuple[Trajectory, RefinementTrace]:
    """SPlaSH(H=0) initialization, then refinement with the remaining budget."""
    T_overall = ctx.cfg.split_timeout if T_overall is None else T_overall
    if T_overall <= 0:
        raise ValueError("T_overall must be positive")
    t0 = time.perf_counter()
    pi_i = splash(start, goal, ctx, H=0, psi0=psi0)
    t_splash = time.perf_counter() - t0
    remaining = T_overall - t_splash
    if remaining <= 0:
        trace = RefinementTrace(stopped="budget")
        pi_i.meta.update({"split_iterations": 0, "t_splash": t_splash})
        return pi_i, trace
    out, trace = local_iterative_tunneling(pi_i, remaining, ctx, goal, on_expand, max_iterations)
    out.meta["t_splash"] = t_splash
    return out, trace
