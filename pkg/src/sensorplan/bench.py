"""Benchmark harness: decayed maps, random instances, coverage metrics and sweeps."""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baseline import joint_baseline
from .config import PlannerConfig
from .coverage_map import CellIndex, CoverageMap
from .footprint import footprint_cells
from .lattice import RobotState
from .splash import NoPathError, PlanContext, splash
from .split import split
from .trajectory import Trajectory

log = logging.getLogger(__name__)

RESULT_FIELDS = ("instance_id", "algorithm", "H", "iteration", "N", "sum_p", "p_bar", "solution_g",
                 "motion_cost_s", "plan_wall_ms", "expansions", "error")
TRACE_FIELDS = ("instance_id", "iteration", "cost", "cost_unshifted", "expansions", "wall_ms",
                "tunnel_states")
ALGORITHMS = ("splash", "split", "joint-baseline")


# --- map generation -------------------------------------------------------

def _nc_patches(rng, height, width, fraction):
    cov = np.ones((height, width), bool)
    target = fraction * height * width
    tries = 0
    while (~cov).sum() < target and tries < 10_000:
        tries += 1
        h = int(rng.integers(4, max(5, height // 5) + 1))
        w = int(rng.integers(4, max(5, width // 5) + 1))
        i = int(rng.integers(0, max(1, height - h + 1)))
        j = int(rng.integers(0, max(1, width - w + 1)))
        cov[i:i + h, j:j + w] = False
    return cov


def _lawnmower(width_m, height_m, spacing, margin):
    """Closed boustrophedon loop as a list of waypoints (metres)."""
    ys = np.arange(margin, height_m - margin + 1e-9, spacing)
    if ys.size == 0:
        ys = np.array([height_m / 2])
    pts = []
    for k, y in enumerate(ys):
        xa, xb = (margin, width_m - margin) if k % 2 == 0 else (width_m - margin, margin)
        pts += [(xa, y), (xb, y)]
    return pts + pts[-2::-1][1:]  # sweep back the way it came


def _pose_along(pts, seglen, total, s):
    s %= total
    for (a, b), L in zip(zip(pts, pts[1:]), seglen):
        if s <= L and L > 0:
            f = s / L
            th = math.atan2(b[1] - a[1], b[0] - a[0])
            return a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1]), th
        s -= L
    a, b = pts[-2], pts[-1]
    return b[0], b[1], math.atan2(b[1] - a[1], b[0] - a[0])


def gen_decayed_map(seed: int, width: int = 100, height: int = 100, sim_minutes: float = 10,
                    snapshot_times: Optional[Sequence[int]] = None, cfg: PlannerConfig = PlannerConfig(),
                    cell_size: float = 1.0) -> List[CoverageMap]:
    """Let a fresh map decay while one fixed-sensor UAV sweeps it; return snapshots.

    Snapshot times are in seconds from the start of the simulation (0 = before any decay).
    """
    if width < 4 or height < 4 or cell_size <= 0:
        raise ValueError("map must be at least 4x4 cells")
    if sim_minutes <= 0:
        raise ValueError("sim_minutes must be positive")
    T = int(round(sim_minutes * 60))
    if snapshot_times is None:
        snapshot_times = [T]
    snaps = sorted(set(int(t) for t in snapshot_times))
    if snaps and (snaps[0] < 0 or snaps[-1] > T):
        raise ValueError(f"snapshot times must lie in [0, {T}]")
    rng = np.random.default_rng(seed)
    cov = _nc_patches(rng, height, width, cfg.nc_fraction)
    m = CoverageMap(cov, np.full((height, width), cfg.lifetime, np.int64), np.zeros((height, width), np.int64),
                    cell_size, 0)
    geom = cfg.geometry()
    wm, hm = width * cell_size, height * cell_size
    pts = _lawnmower(wm, hm, geom.rect_width, min(2.0 * cell_size, wm / 4))
    seglen = [math.dist(a, b) for a, b in zip(pts, pts[1:])]
    total = sum(seglen)
    phase = float(rng.uniform(0, total))
    out = {}
    if 0 in snaps:
        out[0] = m
    for tick in range(1, T + 1):
        m = m.decay(1)
        x, y, th = _pose_along(pts, seglen, total, phase + cfg.sweep_speed * tick)
        x = min(max(x, 0.0), wm - 1e-6)
        y = min(max(y, 0.0), hm - 1e-6)
        m = m.mark_covered(footprint_cells(m, x, y, th, geom, th).cells)
        if tick in snaps:
            out[tick] = m
    return [out[t] for t in snaps]


# --- instances ------------------------------------------------------------

@dataclass(frozen=True)
class Instance:
    instance_id: int
    map_index: int
    start: RobotState
    goal: CellIndex
    psi0: int


@dataclass
class InstanceSet:
    maps: List[CoverageMap]
    pairs_per_map: int
    seed: int
    instances: List[Instance] = field(default_factory=list)


def make_instances(maps: Sequence[CoverageMap], pairs_per_map: int, seed: int,
                   cfg: PlannerConfig = PlannerConfig(), min_dist: float = 25.0, max_dist: float = 60.0,
                   margin: int = 10) -> InstanceSet:
    """Random start/goal pairs; start speed level and heading are random, goal differs from start."""
    rng = np.random.default_rng(seed)
    out = []
    n_levels = len(cfg.speeds)
    for mi, m in enumerate(maps):
        lo_c, hi_c = min(margin, m.width // 4), max(m.width - margin, m.width * 3 // 4)
        lo_r, hi_r = min(margin, m.height // 4), max(m.height - margin, m.height * 3 // 4)
        for _ in range(pairs_per_map):
            for _attempt in range(1000):
                sc, sr = int(rng.integers(lo_c, hi_c)), int(rng.integers(lo_r, hi_r))
                gc, gr = int(rng.integers(lo_c, hi_c)), int(rng.integers(lo_r, hi_r))
                d = math.hypot(gc - sc, gr - sr) * m.cell_size
                if (sc, sr) != (gc, gr) and min_dist <= d <= max_dist:
                    break
            heading = int(rng.integers(0, cfg.n_theta))
            speed = int(rng.integers(0, min(2, n_levels)))
            start = RobotState(sc, sr, heading, speed, 0)
            psi0 = round(heading * cfg.n_psi / cfg.n_theta) % cfg.n_psi
            out.append(Instance(len(out), mi, start, (gr, gc), psi0))
    return InstanceSet(list(maps), pairs_per_map, seed, out)


# --- metrics --------------------------------------------------------------

@dataclass
class PlanMetrics:
    N: int
    sum_p: int
    p_bar: Optional[float]
    motion_cost: float
    solution_g: Optional[float] = None
    plan_wall_ms: Optional[float] = None


def evaluate(traj: Trajectory, m: CoverageMap, solution_g=None, plan_wall_ms=None) -> PlanMetrics:
    """Distinct coverage cells seen, and their priorities at first sight (map decays along the way)."""
    if not traj.steps:
        return PlanMetrics(0, 0, None, traj.motion_cost, solution_g, plan_wall_ms)
    t0 = traj.steps[0].t
    pri = m.lifetime - m.age
    seen = set()
    total = 0
    for st in traj.steps:
        elapsed = st.t - t0
        for i, j in zip(st.footprint.rows.tolist(), st.footprint.cols.tolist()):
            if (i, j) in seen or not m.coverage[i, j]:
                continue
            seen.add((i, j))
            total += int(pri[i, j]) - elapsed
    n = len(seen)
    return PlanMetrics(n, total, total / n if n else None, traj.motion_cost, solution_g, plan_wall_ms)


# --- sweep ----------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return ""
        return f"{v:.6f}"
    return str(v)


def _row(inst, algo, H, iteration, metrics: Optional[PlanMetrics], g, wall_ms, expansions, error=""):
    return {
        "instance_id": inst.instance_id, "algorithm": algo, "H": H, "iteration": iteration,
        "N": metrics.N if metrics else None, "sum_p": metrics.sum_p if metrics else None,
        "p_bar": metrics.p_bar if metrics else None, "solution_g": g,
        "motion_cost_s": metrics.motion_cost if metrics else None, "plan_wall_ms": wall_ms,
        "expansions": expansions, "error": error,
    }


@dataclass
class InstanceOutcome:
    rows: List[dict]
    trace: List[dict]
    split_iters_5s: Optional[int] = None


def run_instance(inst: Instance, m: CoverageMap, cfg: PlannerConfig, algorithms=ALGORITHMS,
                 H_values=(0, 3, 5), record_timing=True) -> InstanceOutcome:
    ctx = PlanContext(m, cfg)
    rows, trace = [], []
    iters_5s = None

    def ms(t):
        return t * 1e3 if record_timing else None

    if "splash" in algorithms:
        for H in H_values:
            t0 = time.perf_counter()
            try:
                tr = splash(inst.start, inst.goal, ctx, H=H, psi0=inst.psi0)
            except NoPathError as exc:
                rows.append(_row(inst, "splash", H, 0, None, None, ms(time.perf_counter() - t0), None, str(exc)))
                continue
            wall = time.perf_counter() - t0
            exp = tr.meta["robot_expansions"] + tr.meta["sensor_expansions"]
            rows.append(_row(inst, "splash", H, 0, evaluate(tr, m), tr.meta["sensor_g"], ms(wall), exp))
    if "split" in algorithms:
        t0 = time.perf_counter()
        try:
            tr, tc = split(inst.start, inst.goal, ctx, psi0=inst.psi0)
            wall = time.perf_counter() - t0
            exp = sum(r.expansions for r in tc.records)
            g = tr.meta.get("split_g", tr.meta.get("sensor_g"))
            rows.append(_row(inst, "split", 0, len(tc.records), evaluate(tr, m), g, ms(wall), exp))
            elapsed = tr.meta.get("t_splash", 0.0)
            iters_5s = 0
            for r in tc.records:
                elapsed += r.wall_ms / 1e3
                if elapsed <= 5.0:
                    iters_5s += 1
                trace.append({"instance_id": inst.instance_id, "iteration": r.iteration, "cost": r.cost,
                              "cost_unshifted": r.cost_unshifted, "expansions": r.expansions,
                              "wall_ms": r.wall_ms if record_timing else None, "tunnel_states": r.tunnel_states})
        except NoPathError as exc:
            rows.append(_row(inst, "split", 0, 0, None, None, ms(time.perf_counter() - t0), None, str(exc)))
    if "joint-baseline" in algorithms:
        t0 = time.perf_counter()
        try:
            tr = joint_baseline(inst.start, inst.goal, ctx, psi0=inst.psi0)
            rows.append(_row(inst, "joint-baseline", None, 0, evaluate(tr, m), tr.meta["baseline_g"],
                             ms(time.perf_counter() - t0), tr.meta["expansions"]))
        except NoPathError as exc:
            rows.append(_row(inst, "joint-baseline", None, 0, None, None, ms(time.perf_counter() - t0),
                             getattr(exc, "expansions", None), "timeout" if "timed out" in str(exc) else str(exc)))
    return InstanceOutcome(rows, trace, iters_5s)


def _run_one(args):
    inst, m, cfg, algorithms, H_values, record_timing = args
    return run_instance(inst, m, cfg, algorithms, H_values, record_timing)


@dataclass
class SweepResult:
    rows: List[dict]
    trace: List[dict]
    split_iters_5s: List[int]

    def to_csv(self) -> str:
        return _csv(RESULT_FIELDS, self.rows)

    def trace_csv(self) -> str:
        return _csv(TRACE_FIELDS, self.trace)


def _csv(fields, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(r.get(f)) for f in fields])
    return buf.getvalue()


def run_sweep(instances: InstanceSet, algorithms=ALGORITHMS, cfg: PlannerConfig = PlannerConfig(),
              H_values=(0, 3, 5), workers: int = 1, record_timing: bool = True) -> SweepResult:
    """Run every algorithm on every instance; failures become rows with an error message."""
    jobs = [(inst, instances.maps[inst.map_index], cfg, tuple(algorithms), tuple(H_values), record_timing)
            for inst in instances.instances]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    rows, trace, iters = [], [], []
    for o in outcomes:  # pool.map keeps instance order
        rows += o.rows
        trace += o.trace
        if o.split_iters_5s is not None:
            iters.append(o.split_iters_5s)
    return SweepResult(rows, trace, iters)


def sign_test(a: Sequence[float], b: Sequence[float]) -> Tuple[int, int, float]:
    """Paired sign test of a > b: (wins, losses, one-sided p-value), ties dropped."""
    from scipy.stats import binomtest
    wins = sum(1 for x, y in zip(a, b) if x > y)
    losses = sum(1 for x, y in zip(a, b) if x < y)
    if wins + losses == 0:
        return 0, 0, 1.0
    return wins, losses, float(binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)


def summarize(result: SweepResult) -> Dict[str, object]:
    """Median N per (algorithm, H), median wall times, and the H=3 vs H=0 sign test."""
    out: Dict[str, object] = {}
    groups: Dict[str, List[dict]] = {}
    for r in result.rows:
        label = r["algorithm"] if r["algorithm"] != "splash" else f"splash_H{r['H']}"
        groups.setdefault(label, []).append(r)
    for label, rs in sorted(groups.items()):
        ns = [r["N"] for r in rs if r["N"] is not None]
        walls = [r["plan_wall_ms"] for r in rs if r["plan_wall_ms"] is not None]
        out[f"median_N[{label}]"] = statistics.median(ns) if ns else None
        out[f"median_wall_ms[{label}]"] = statistics.median(walls) if walls else None
        out[f"failures[{label}]"] = sum(1 for r in rs if r["error"])
    by_inst: Dict[Tuple[int, int], int] = {}
    for r in result.rows:
        if r["algorithm"] == "splash" and r["N"] is not None:
            by_inst[(r["instance_id"], r["H"])] = r["N"]
    ids = sorted({i for i, h in by_inst if (i, 0) in by_inst and (i, 3) in by_inst})
    if ids:
        w, l, p = sign_test([by_inst[(i, 3)] for i in ids], [by_inst[(i, 0)] for i in ids])
        out["sign_test_H3_vs_H0"] = {"wins": w, "losses": l, "ties": len(ids) - w - l, "p_value": p}
    if result.split_iters_5s:
        out["median_split_iterations_within_5s"] = statistics.median(result.split_iters_5s)
    return out


def deterministic_config(cfg: PlannerConfig, split_iterations: int = 2,
                         baseline_expansions: int = 20_000) -> PlannerConfig:
    """Swap wall-clock budgets for iteration/expansion caps so sweeps replay exactly."""
    return cfg.replace(robot_timeout=0.0, split_timeout=math.inf, split_max_iterations=split_iterations,
                       baseline_timeout=math.inf, baseline_max_expansions=baseline_expansions)
