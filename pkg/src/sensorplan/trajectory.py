"""Joint robot/sensor trajectories at 1 s resolution and the ``traj v1`` format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .coverage_map import CoverageMap
from .footprint import Footprint, SensorGeometry, footprint_cells
from .lattice import PrimitiveLibrary, RobotState

TRAJ_MAGIC = "traj"
TRAJ_VERSION = "v1"


class TrajectoryFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Step:
    t: int
    x: float
    y: float
    theta: float
    v: float
    psi: int  # pan bin
    footprint: Optional[Footprint] = None


@dataclass(eq=False)
class Trajectory:
    steps: List[Step]
    primitives: List[Tuple[RobotState, int]] = field(default_factory=list)  # (anchor, primitive id)
    motion_cost: float = 0.0
    sensor_cost: float = 0.0
    n_psi: int = 16
    meta: Dict[str, float] = field(default_factory=dict)

    def __len__(self):
        return len(self.steps)

    @property
    def psis(self) -> List[int]:
        return [s.psi for s in self.steps]

    def footprints(self) -> List[Footprint]:
        return [s.footprint for s in self.steps]


def robot_waypoints(start: RobotState, prims: Sequence[int], lib: PrimitiveLibrary):
    """Per-second (x, y, theta, t, v) samples: the start pose, then every primitive tick."""
    x0, y0 = lib.position(start)
    out = [(x0, y0, lib.theta(start), start.t, lib.speed(start))]
    s = start
    anchors = []
    for pid in prims:
        p = lib.by_id[pid]
        ax, ay = lib.position(s)
        for k, (px, py, th) in enumerate(p.poses_1s):
            out.append((ax + px, ay + py, th, s.t + k + 1, p.speeds_1s[k]))
        anchors.append((s, pid))
        s = lib.apply(s, p)
    return out, anchors


def assemble(start: RobotState, prims: Sequence[int], psis: Sequence[int], lib: PrimitiveLibrary,
             geom: SensorGeometry, m: CoverageMap, sensor_cost: float = 0.0, meta=None) -> Trajectory:
    wps, anchors = robot_waypoints(start, prims, lib)
    if len(psis) != len(wps):
        raise ValueError(f"{len(psis)} pan bins for {len(wps)} waypoints")
    steps = []
    for (x, y, th, t, v), q in zip(wps, psis):
        fp = footprint_cells(m, x, y, geom.psi_of(q), geom, th)
        steps.append(Step(t, x, y, th, v, int(q) % geom.n_psi, fp))
    motion = float(sum(lib.by_id[p].duration for p in prims))
    return Trajectory(steps, anchors, motion, sensor_cost, geom.n_psi, dict(meta or {}))


def validate(traj: Trajectory, geom: SensorGeometry, m: CoverageMap) -> List[str]:
    """Invariant violations (empty list when the trajectory is well formed)."""
    errs = []
    for a, b in zip(traj.steps, traj.steps[1:]):
        if b.t - a.t != 1:
            errs.append(f"t={b.t}: timestamps must advance by 1 s")
        d = (b.psi - a.psi) % geom.n_psi
        if min(d, geom.n_psi - d) > 1:
            errs.append(f"t={b.t}: pan jumps by more than one step")
    for s in traj.steps:
        fp = footprint_cells(m, s.x, s.y, geom.psi_of(s.psi), geom, s.theta)
        if s.footprint is not None and fp.cells != s.footprint.cells:
            errs.append(f"t={s.t}: stored footprint does not match pose")
    return errs


# --- traj v1 --------------------------------------------------------------

def dumps_trajectory(traj: Trajectory) -> str:
    out = [f"{TRAJ_MAGIC} {TRAJ_VERSION} steps={len(traj.steps)} n_psi={traj.n_psi} "
           f"motion_cost={traj.motion_cost!r} sensor_cost={traj.sensor_cost!r}"]
    out.append("primitives " + " ".join(
        f"{a.col},{a.row},{a.heading},{a.speed},{a.t}:{pid}" for a, pid in traj.primitives))
    for s in traj.steps:
        out.append(f"{s.t} {s.x!r} {s.y!r} {s.theta!r} {s.v!r} {s.psi}")
    out.append("footprints")
    for s in traj.steps:
        cells = sorted(s.footprint.cells) if s.footprint is not None else []
        out.append(f"{s.t}: " + " ".join(f"{i},{j}" for i, j in cells))
    return "\n".join(out) + "\n"


def loads_trajectory(text: str) -> Trajectory:
    lines = text.splitlines()
    if not lines:
        raise TrajectoryFormatError("empty trajectory file")
    head = lines[0].split()
    if len(head) < 2 or head[0] != TRAJ_MAGIC:
        raise TrajectoryFormatError("line 1: not a traj file")
    if head[1] != TRAJ_VERSION:
        raise TrajectoryFormatError(f"line 1: unsupported version {head[1]!r}")
    try:
        kv = dict(tok.split("=", 1) for tok in head[2:])
        n = int(kv["steps"])
        n_psi = int(kv["n_psi"])
        motion, sensor = float(kv["motion_cost"]), float(kv["sensor_cost"])
        prims = []
        ptoks = lines[1].split()
        if not ptoks or ptoks[0] != "primitives":
            raise ValueError("line 2 must list primitives")
        for tok in ptoks[1:]:
            a, pid = tok.split(":")
            c, r, h, v, t = (int(x) for x in a.split(","))
            prims.append((RobotState(c, r, h, v, t), int(pid)))
        raw_steps = []
        for ln in lines[2:2 + n]:
            f = ln.split()
            raw_steps.append((int(f[0]), float(f[1]), float(f[2]), float(f[3]), float(f[4]), int(f[5])))
        if len(raw_steps) != n or lines[2 + n].strip() != "footprints":
            raise ValueError("step block truncated")
        steps = []
        for (t, x, y, th, v, q), ln in zip(raw_steps, lines[3 + n:3 + 2 * n]):
            lab, _, body = ln.partition(":")
            if int(lab) != t:
                raise ValueError(f"footprint block out of order at t={t}")
            cells = [tuple(int(x) for x in c.split(",")) for c in body.split()]
            rows = np.array([c[0] for c in cells], dtype=np.int64)
            cols = np.array([c[1] for c in cells], dtype=np.int64)
            steps.append(Step(t, x, y, th, v, q, Footprint(rows, cols, (x, y, th, q * 2 * math.pi / n_psi))))
        if len(steps) != n:
            raise ValueError("footprint block truncated")
    except (KeyError, ValueError, IndexError) as exc:
        raise TrajectoryFormatError(str(exc)) from None
    return Trajectory(steps, prims, motion, sensor, n_psi)


def save_trajectory(traj: Trajectory, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_trajectory(traj))


def load_trajectory(path) -> Trajectory:
    with open(path, encoding="ascii") as fh:
        return loads_trajectory(fh.read())
