"""State lattice for the UAV: headings, speed levels and offline motion primitives.

Primitives follow 2-D double-integrator dynamics. Each one is first forward
simulated with constant tangential acceleration and constant turn rate, its
endpoint is snapped to the nearest cell center, and the motion is then re-fit
as the cubic (linear-acceleration) double-integrator trajectory that reaches
the snapped lattice state exactly. Fits that break the acceleration or turn-rate
bounds are dropped.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .coverage_map import CoverageMap

log = logging.getLogger(__name__)

PRIM_MAGIC = "mprim"
PRIM_VERSION = "v1"


class PrimitiveFormatError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeParams:
    n_theta: int = 16
    speeds: Tuple[float, ...] = (0.0, 5.0, 10.0)
    a_max: float = 2.5  # m/s^2
    turn_rate_max: float = 0.6  # rad/s, enforced while speed >= turn_check_speed
    turn_check_speed: float = 1.0
    duration: int = 4  # s
    cell_size: float = 1.0
    heading_changes: Tuple[int, ...] = (0, -1, 1, -2, 2)

    def __post_init__(self):
        if self.n_theta < 4:
            raise ValueError("n_theta must be >= 4")
        if not self.speeds or any(v < 0 for v in self.speeds):
            raise ValueError("speed levels must be a non-empty list of non-negative values")
        if list(self.speeds) != sorted(self.speeds):
            raise ValueError("speed levels must be increasing")
        if self.a_max <= 0 or self.turn_rate_max <= 0 or self.duration < 1 or self.cell_size <= 0:
            raise ValueError("bounds, duration and cell size must be positive")

    def theta_of(self, heading: int) -> float:
        return (heading % self.n_theta) * 2.0 * math.pi / self.n_theta

    @property
    def v_max(self) -> float:
        return max(self.speeds)


@dataclass(frozen=True, order=True)
class RobotState:
    """On-lattice robot state: cell (col, row) center, heading bin, speed level, time."""
    col: int
    row: int
    heading: int
    speed: int
    t: int = 0


@dataclass(frozen=True, eq=False)
class MotionPrimitive:
    id: int
    start_heading: int
    start_speed: int
    end_offset: Tuple[int, int]  # (dcol, drow)
    end_heading: int
    end_speed: int
    duration: int
    coeffs: np.ndarray  # (2, 4): x and y cubic coefficients in local metres
    theta0: float
    theta1: float
    poses_1s: Tuple[Tuple[float, float, float], ...] = field(default=())
    speeds_1s: Tuple[float, ...] = field(default=())
    dense_poses: np.ndarray = field(default=None)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        c = self.coeffs
        return (c[0, 0] + c[0, 1] * t + c[0, 2] * t ** 2 + c[0, 3] * t ** 3,
                c[1, 0] + c[1, 1] * t + c[1, 2] * t ** 2 + c[1, 3] * t ** 3)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        c = self.coeffs
        return (c[0, 1] + 2 * c[0, 2] * t + 3 * c[0, 3] * t ** 2,
                c[1, 1] + 2 * c[1, 2] * t + 3 * c[1, 3] * t ** 2)

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        c = self.coeffs
        return 2 * c[0, 2] + 6 * c[0, 3] * t, 2 * c[1, 2] + 6 * c[1, 3] * t

    def heading_at(self, t: float) -> float:
        vx, vy = self.velocity(t)
        if math.hypot(vx, vy) > 1e-6:
            return math.atan2(vy, vx) % (2 * math.pi)
        # at rest the heading label is interpolated
        return (self.theta0 + _wrap(self.theta1 - self.theta0) * t / self.duration) % (2 * math.pi)

    @property
    def is_wait(self) -> bool:
        return self.end_offset == (0, 0) and self.start_speed == self.end_speed and \
            self.start_heading == self.end_heading and not self.coeffs.any()


def _wrap(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def primitive_cost(p: MotionPrimitive) -> float:
    return float(p.duration)


def _nominal_endpoint(v0, v1, th0, dth, T, steps=4000):
    """Forward-simulate constant tangential acceleration and constant turn rate (midpoint rule)."""
    dt = T / steps
    x = y = 0.0
    for k in range(steps):
        tm = (k + 0.5) * dt
        v = v0 + (v1 - v0) * tm / T
        th = th0 + dth * tm / T
        x += v * math.cos(th) * dt
        y += v * math.sin(th) * dt
    return x, y


def _hermite(p1, v0, v1, T):
    """Cubic p(t) = v0 t + c2 t^2 + c3 t^3 with p(0)=0, p'(0)=v0, p(T)=p1, p'(T)=v1."""
    c2 = (3 * p1 - (2 * v0 + v1) * T) / T ** 2
    c3 = (-2 * p1 + (v0 + v1) * T) / T ** 3
    return np.array([0.0, v0, c2, c3])


def _build(pid, h0, s0, h1, s1, dcol, drow, params: LatticeParams, coeffs=None):
    T = params.duration
    th0, th1 = params.theta_of(h0), params.theta_of(h1)
    v0, v1 = params.speeds[s0], params.speeds[s1]
    if coeffs is None:
        px, py = dcol * params.cell_size, drow * params.cell_size
        coeffs = np.vstack([_hermite(px, v0 * math.cos(th0), v1 * math.cos(th1), T),
                            _hermite(py, v0 * math.sin(th0), v1 * math.sin(th1), T)])
    prim = MotionPrimitive(pid, h0, s0, (dcol, drow), h1, s1, T, coeffs, th0, th1)
    ts = np.arange(1, T + 1, dtype=float)
    xs, ys = prim.position(ts)
    vx, vy = prim.velocity(ts)
    poses = tuple((float(x), float(y), prim.heading_at(float(t))) for x, y, t in zip(xs, ys, ts))
    spd = tuple(float(math.hypot(a, b)) for a, b in zip(vx, vy))
    td = np.linspace(0.0, T, 8 * T + 1)
    dx, dy = prim.position(td)
    dense = np.column_stack([td, dx, dy])
    dense.setflags(write=False)
    object.__setattr__(prim, "poses_1s", poses)
    object.__setattr__(prim, "speeds_1s", spd)
    object.__setattr__(prim, "dense_poses", dense)
    return prim


def check_feasible(p: MotionPrimitive, params: LatticeParams, samples: int = 401) -> Optional[str]:
    """Return a reason string if the primitive violates the dynamic bounds, else None."""
    t = np.linspace(0.0, p.duration, samples)
    ax, ay = p.acceleration(t)
    acc = np.hypot(ax, ay)
    if acc.max() > params.a_max * (1 + 1e-9):
        return f"peak acceleration {acc.max():.3f} > {params.a_max}"
    vx, vy = p.velocity(t)
    sp = np.hypot(vx, vy)
    moving = sp >= params.turn_check_speed
    if moving.any():
        rate = np.abs(vx * ay - vy * ax)[moving] / sp[moving] ** 2
        if rate.max() > params.turn_rate_max * (1 + 1e-9):
            return f"peak turn rate {rate.max():.3f} > {params.turn_rate_max}"
    # endpoint must land exactly on the lattice state
    ex, ey = p.position(float(p.duration))
    cs = params.cell_size
    if abs(ex - p.end_offset[0] * cs) > 1e-9 or abs(ey - p.end_offset[1] * cs) > 1e-9:
        return "endpoint off lattice"
    evx, evy = p.velocity(float(p.duration))
    v1 = params.speeds[p.end_speed]
    th1 = params.theta_of(p.end_heading)
    if abs(evx - v1 * math.cos(th1)) > 1e-9 or abs(evy - v1 * math.sin(th1)) > 1e-9:
        return "end velocity off lattice"
    return None


@dataclass
class PrimitiveLibrary:
    params: LatticeParams
    primitives: Dict[Tuple[int, int], List[MotionPrimitive]]
    by_id: List[MotionPrimitive]
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        self._bbox = {}
        for p in self.by_id:
            d = p.dense_poses
            self._bbox[p.id] = (d[:, 1].min(), d[:, 1].max(), d[:, 2].min(), d[:, 2].max())

    @property
    def v_eff(self) -> float:
        """Largest average speed over any primitive; bounds distance per second of plan time."""
        best = self.params.v_max
        cs = self.params.cell_size
        for p in self.by_id:
            best = max(best, math.hypot(*p.end_offset) * cs / p.duration)
        return best

    def average_out_degree(self) -> float:
        return len(self.by_id) / len(self.primitives)

    def position(self, s: RobotState) -> Tuple[float, float]:
        cs = self.params.cell_size
        return (s.col + 0.5) * cs, (s.row + 0.5) * cs

    def theta(self, s: RobotState) -> float:
        return self.params.theta_of(s.heading)

    def speed(self, s: RobotState) -> float:
        return self.params.speeds[s.speed]

    def apply(self, s: RobotState, p: MotionPrimitive) -> RobotState:
        return RobotState(s.col + p.end_offset[0], s.row + p.end_offset[1], p.end_heading,
                          p.end_speed, s.t + p.duration)

    def stays_in(self, s: RobotState, p: MotionPrimitive, m: CoverageMap) -> bool:
        x, y = self.position(s)
        x0, x1, y0, y1 = self._bbox[p.id]
        return m.contains_point(x + x0, y + y0) and m.contains_point(x + x1, y + y1)


def generate_primitives(params: LatticeParams = LatticeParams()) -> PrimitiveLibrary:
    prims: Dict[Tuple[int, int], List[MotionPrimitive]] = {}
    by_id: List[MotionPrimitive] = []
    warnings: List[str] = []
    n = params.n_theta
    cs = params.cell_size
    T = params.duration
    deltas = []
    for d in params.heading_changes:
        if all((d - e) % n for e in deltas):
            deltas.append(d)
    for h0 in range(n):
        th0 = params.theta_of(h0)
        for s0 in range(len(params.speeds)):
            fan: List[MotionPrimitive] = []
            seen = set()
            for ds in (0, -1, 1):
                s1 = s0 + ds
                if not 0 <= s1 < len(params.speeds):
                    continue
                for dh in deltas:
                    h1 = (h0 + dh) % n
                    v0, v1 = params.speeds[s0], params.speeds[s1]
                    x, y = _nominal_endpoint(v0, v1, th0, _wrap(params.theta_of(h1) - th0), T)
                    dcol, drow = int(round(x / cs)), int(round(y / cs))
                    key = (dcol, drow, h1, s1)
                    if key in seen:
                        continue
                    prim = _build(len(by_id), h0, s0, h1, s1, dcol, drow, params)
                    reason = check_feasible(prim, params)
                    if reason:
                        warnings.append(f"dropped h={h0} s={s0} -> h={h1} s={s1}: {reason}")
                        continue
                    seen.add(key)
                    fan.append(prim)
                    by_id.append(prim)
            prims[(h0, s0)] = fan
    if not by_id:
        raise ValueError("primitive library is empty for these parameters")
    for w in warnings:
        log.debug(w)
    return PrimitiveLibrary(params, prims, by_id, warnings)


def robot_successors(s: RobotState, lib: PrimitiveLibrary, m: CoverageMap,
                     is_free: Optional[Callable[[RobotState, MotionPrimitive], bool]] = None
                     ) -> List[Tuple[RobotState, MotionPrimitive]]:
    """Apply every primitive of the state's fan, dropping those that leave the map.

    ``is_free`` is an optional extra filter (e.g. obstacles); maps here have none.
    """
    out = []
    for p in lib.primitives.get((s.heading, s.speed), ()):
        if not lib.stays_in(s, p, m):
            continue
        if is_free is not None and not is_free(s, p):
            continue
        out.append((lib.apply(s, p), p))
    return out


def waypoints_1s(p: MotionPrimitive, anchor: RobotState, lib: PrimitiveLibrary):
    """Per-second poses (x, y, theta, t) of ``p`` started from ``anchor``."""
    if (anchor.heading, anchor.speed) != (p.start_heading, p.start_speed):
        raise ValueError("anchor heading/speed do not match the primitive's start")
    x0, y0 = lib.position(anchor)
    return [(x0 + px, y0 + py, th, anchor.t + k + 1) for k, (px, py, th) in enumerate(p.poses_1s)]


# --- mprim v1 text format -------------------------------------------------

def dumps_library(lib: PrimitiveLibrary) -> str:
    p = lib.params
    head = (f"{PRIM_MAGIC} {PRIM_VERSION} n_theta={p.n_theta} speeds={','.join(repr(float(v)) for v in p.speeds)} "
            f"a_max={p.a_max!r} turn_rate_max={p.turn_rate_max!r} turn_check_speed={p.turn_check_speed!r} "
            f"duration={p.duration} cell_size={p.cell_size!r} "
            f"heading_changes={','.join(str(d) for d in p.heading_changes)} count={len(lib.by_id)}")
    out = [head]
    for q in lib.by_id:
        out.append(f"primitive {q.id} start {q.start_heading} {q.start_speed} "
                   f"end {q.end_heading} {q.end_speed} offset {q.end_offset[0]} {q.end_offset[1]}")
        for axis in range(2):
            out.append("coeffs " + " ".join(repr(float(c)) for c in q.coeffs[axis]))
        out.append("end")
    return "\n".join(out) + "\n"


def loads_library(text: str) -> PrimitiveLibrary:
    lines = text.splitlines()
    if not lines:
        raise PrimitiveFormatError("empty primitive file")
    head = lines[0].split()
    if len(head) < 2 or head[0] != PRIM_MAGIC:
        raise PrimitiveFormatError("line 1: not an mprim file")
    if head[1] != PRIM_VERSION:
        raise PrimitiveFormatError(f"line 1: unsupported version {head[1]!r}")
    kv = dict(tok.split("=", 1) for tok in head[2:])
    try:
        params = LatticeParams(
            n_theta=int(kv["n_theta"]),
            speeds=tuple(float(v) for v in kv["speeds"].split(",")),
            a_max=float(kv["a_max"]), turn_rate_max=float(kv["turn_rate_max"]),
            turn_check_speed=float(kv["turn_check_speed"]), duration=int(kv["duration"]),
            cell_size=float(kv["cell_size"]),
            heading_changes=tuple(int(v) for v in kv["heading_changes"].split(",")))
        count = int(kv["count"])
    except (KeyError, ValueError) as exc:
        raise PrimitiveFormatError(f"line 1: bad header ({exc})") from None
    prims: Dict[Tuple[int, int], List[MotionPrimitive]] = {
        (h, s): [] for h in range(params.n_theta) for s in range(len(params.speeds))}
    by_id: List[MotionPrimitive] = []
    i = 1
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        tok = lines[i].split()
        try:
            if tok[0] != "primitive" or lines[i + 3].strip() != "end":
                raise ValueError("malformed block")
            pid, h0, s0, h1, s1, dc, dr = (int(tok[k]) for k in (1, 3, 4, 6, 7, 9, 10))
            coeffs = np.array([[float(v) for v in lines[i + 1].split()[1:]],
                               [float(v) for v in lines[i + 2].split()[1:]]])
            if coeffs.shape != (2, 4):
                raise ValueError("coeffs need 4 values per axis")
        except (IndexError, ValueError) as exc:
            raise PrimitiveFormatError(f"line {i + 1}: {exc}") from None
        if pid != len(by_id):
            raise PrimitiveFormatError(f"line {i + 1}: primitive ids must be consecutive")
        prim = _build(pid, h0, s0, h1, s1, dc, dr, params, coeffs)
        reason = check_feasible(prim, params)
        if reason:
            raise PrimitiveFormatError(f"line {i + 1}: primitive {pid} infeasible: {reason}")
        by_id.append(prim)
        prims[(h0, s0)].append(prim)
        i += 4
    if len(by_id) != count:
        raise PrimitiveFormatError(f"expected {count} primitives, found {len(by_id)}")
    if not by_id:
        raise PrimitiveFormatError("primitive library is empty")
    return PrimitiveLibrary(params, prims, by_id)


def save_library(lib: PrimitiveLibrary, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_library(lib))


def load_library(path) -> PrimitiveLibrary:
    with open(path, encoding="ascii") as fh:
        return loads_library(fh.read())
