"""Sensor and joint (robot x sensor) search spaces.

Sensor states live on a leveled DAG over the waypoints of a fixed robot
trajectory; each carries the last H pan bins, which splits states that would
otherwise merge. Joint states pair a robot pose with a pan bin and are expanded
one second at a time: from an on-lattice state the search commits to a
primitive and a pan change for its first tick, and the following ticks only
choose pan changes until the primitive ends on the lattice again.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import FrozenSet, List, NamedTuple, Optional, Tuple

from .coverage_map import CellIndex, CoverageMap
from .footprint import SensorGeometry, footprint_cells
from .lattice import PrimitiveLibrary, RobotState

PAN_CHOICES = (-1, 0, 1)
Waypoint = Tuple[float, float, float, int]  # (x, y, theta, t)


@dataclass(frozen=True, order=True)
class SensorState:
    level: int
    psi: int  # pan bin
    history: Tuple[int, ...] = ()  # oldest first


@dataclass(frozen=True)
class SensorPlanProblem:
    waypoints: Tuple[Waypoint, ...]
    psi0: int
    H: int
    n_psi: int
    pan_limits: Optional[Tuple[int, int]] = None  # inclusive bin range, no wrap when set

    def __post_init__(self):
        if self.H < 0:
            raise ValueError("history size must be >= 0")
        ts = [w[3] for w in self.waypoints]
        if any(b - a != 1 for a, b in zip(ts, ts[1:])):
            raise ValueError("waypoints must be time-ordered with 1 s spacing")

    @property
    def last_level(self) -> int:
        return len(self.waypoints) - 1

    def start(self) -> SensorState:
        return SensorState(0, self.psi0 % self.n_psi, ())


def pan_options(psi: int, n_psi: int, pan_limits=None) -> List[int]:
    out = []
    for d in PAN_CHOICES:
        q = psi + d
        if pan_limits is not None:
            if pan_limits[0] <= q <= pan_limits[1]:
                out.append(q)
        else:
            q %= n_psi
            if q not in out:
                out.append(q)
    return out


def sensor_successors(s: SensorState, problem: SensorPlanProblem) -> List[SensorState]:
    if s.level >= problem.last_level:
        raise ValueError(f"level {s.level} is terminal")
    hist = (s.history + (s.psi,))[-problem.H:] if problem.H > 0 else ()
    return [SensorState(s.level + 1, q, hist)
            for q in pan_options(s.psi, problem.n_psi, problem.pan_limits)]


def sensor_state_key(s: SensorState):
    return (s.level, s.psi, s.history)


def history_cells(problem: SensorPlanProblem, s: SensorState, geom: SensorGeometry,
                  m: CoverageMap) -> FrozenSet[CellIndex]:
    """Cells seen by the footprints recorded in ``s.history``."""
    cells = set()
    k = len(s.history)
    for idx, psi in enumerate(s.history):
        x, y, th, _ = problem.waypoints[s.level - k + idx]
        cells |= footprint_cells(m, x, y, geom.psi_of(psi), geom, th).cells
    return frozenset(cells)


# --- joint space ----------------------------------------------------------

@dataclass(frozen=True, order=True)
class JointState:
    """Robot pose plus pan bin.

    With ``prim == -1`` the robot sits on the lattice state ``robot``. Otherwise it is
    ``tick`` seconds into primitive ``prim`` started from ``robot``.
    """
    robot: RobotState
    psi: int
    prim: int = -1
    tick: int = 0

    @property
    def t(self) -> int:
        return self.robot.t + self.tick

    @property
    def on_lattice(self) -> bool:
        return self.prim < 0


class JointEdge(NamedTuple):
    prim: int  # primitive being executed on this tick
    tick: int  # 1..duration, seconds into the primitive at the successor
    x: float
    y: float
    theta: float
    psi: int


def joint_pose(s: JointState, lib: PrimitiveLibrary) -> Tuple[float, float, float]:
    x0, y0 = lib.position(s.robot)
    if s.on_lattice:
        return x0, y0, lib.theta(s.robot)
    px, py, th = lib.by_id[s.prim].poses_1s[s.tick - 1]
    return x0 + px, y0 + py, th


def joint_state_key(s: JointState):
    r = s.robot
    return (r.col, r.row, r.heading, r.speed, s.t, s.psi, s.prim, s.tick)


def joint_successors(s: JointState, lib: PrimitiveLibrary, geom: SensorGeometry, m: CoverageMap,
                     t_max: Optional[int] = None, pan_limits=None
                     ) -> List[Tuple[JointState, JointEdge]]:
    """One-second successors of a joint state (3 pan choices per applicable tick)."""
    pans = pan_options(s.psi, geom.n_psi, pan_limits)
    out = []
    if s.on_lattice:
        x0, y0 = lib.position(s.robot)
        for p in lib.primitives.get((s.robot.heading, s.robot.speed), ()):
            if t_max is not None and s.robot.t + p.duration > t_max:
                continue
            if not lib.stays_in(s.robot, p, m):
                continue
            px, py, th = p.poses_1s[0]
            if p.duration == 1:
                nxt = lib.apply(s.robot, p)
                for q in pans:
                    out.append((JointState(nxt, q), JointEdge(p.id, 1, x0 + px, y0 + py, th, q)))
            else:
                for q in pans:
                    out.append((JointState(s.robot, q, p.id, 1),
                                JointEdge(p.id, 1, x0 + px, y0 + py, th, q)))
        return out
    p = lib.by_id[s.prim]
    tick = s.tick + 1
    x0, y0 = lib.position(s.robot)
    px, py, th = p.poses_1s[tick - 1]
    if tick == p.duration:
        nxt = lib.apply(s.robot, p)
        for q in pans:
            out.append((JointState(nxt, q), JointEdge(p.id, tick, x0 + px, y0 + py, th, q)))
    else:
        for q in pans:
            out.append((JointState(s.robot, q, p.id, tick), JointEdge(p.id, tick, x0 + px, y0 + py, th, q)))
    return out
