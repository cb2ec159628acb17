"""Command-line interface: gen-map, gen-prims, plan, render and bench.

Exit codes: 0 success, 2 usage or config error, 3 no path found, 4 I/O or file-format error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from typing import List, Optional, Sequence

from .baseline import joint_baseline
from .bench import (RESULT_FIELDS, _fmt, deterministic_config, evaluate, gen_decayed_map, make_instances,
                    run_sweep, summarize)
from .config import ConfigError, PlannerConfig, load_config
from .coverage_map import MapFormatError, load_map, save_map
from .lattice import PrimitiveFormatError, RobotState, save_library
from .render import render_svg
from .splash import NoPathError, PlanContext, splash
from .split import split
from .trajectory import TrajectoryFormatError, load_trajectory, save_trajectory, validate

EXIT_OK, EXIT_USAGE, EXIT_NO_PATH, EXIT_IO = 0, 2, 3, 4

log = logging.getLogger("sensorplan")


class UsageError(Exception):
    pass


def _ints(text: str, n: int, what: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {n} comma-separated integers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} comma-separated integers, got {text!r}")
    return vals


def _config(args) -> PlannerConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else PlannerConfig()
    return cfg


def _snapshot_times(args, total: int) -> List[int]:
    if args.times:
        try:
            times = sorted({int(v) for v in args.times.split(",")})
        except ValueError:
            raise UsageError(f"--times: malformed list {args.times!r}") from None
        if times[0] < 0 or times[-1] > total:
            raise UsageError(f"--times must lie in [0, {total}]")
        return times
    n = args.snapshots
    if n < 1:
        raise UsageError("--snapshots must be >= 1")
    return [round(total * k / n) for k in range(1, n + 1)]


def cmd_gen_map(args) -> int:
    cfg = _config(args)
    if args.minutes <= 0:
        raise UsageError("--minutes must be positive")
    total = int(round(args.minutes * 60))
    times = _snapshot_times(args, total)
    maps = gen_decayed_map(args.seed, args.width, args.height, args.minutes, times, cfg, args.cell_size)
    os.makedirs(args.out_dir, exist_ok=True)
    for t, m in zip(times, maps):
        path = os.path.join(args.out_dir, f"{args.prefix}_s{args.seed}_t{t}.ccmap")
        save_map(m, path)
        print(path)
    return EXIT_OK


def cmd_gen_prims(args) -> int:
    cfg = _config(args)
    lib = cfg.library(args.cell_size)
    save_library(lib, args.out)
    print(f"{args.out}: {len(lib.by_id)} primitives, average out-degree {lib.average_out_degree():.2f}, "
          f"{len(lib.warnings)} dropped")
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _config(args)
    if args.H is not None:
        cfg = cfg.replace(H=args.H)
    col, row, heading, speed = _ints(args.start, 4, "--start")
    gcol, grow = _ints(args.goal, 2, "--goal")
    if not (0 <= heading < cfg.n_theta and 0 <= speed < len(cfg.speeds)):
        raise UsageError("--start heading/speed bin out of range")
    m = load_map(args.map)
    if not m.in_bounds((row, col)) or not m.in_bounds((grow, gcol)):
        raise UsageError("--start/--goal outside the map")
    start = RobotState(col, row, heading, speed, 0)
    goal = (grow, gcol)
    ctx = PlanContext(m, cfg)
    t0 = time.perf_counter()
    iteration = 0
    trace = None
    if args.algo == "splash":
        traj = splash(start, goal, ctx, psi0=args.psi0)
        g, exp = traj.meta["sensor_g"], traj.meta["robot_expansions"] + traj.meta["sensor_expansions"]
    elif args.algo == "split":
        budget = args.timeout if args.timeout is not None else cfg.split_timeout
        traj, trace = split(start, goal, ctx, T_overall=budget, psi0=args.psi0)
        iteration = len(trace.records)
        g, exp = traj.meta.get("split_g", traj.meta.get("sensor_g")), sum(r.expansions for r in trace.records)
    else:
        traj = joint_baseline(start, goal, ctx, psi0=args.psi0, timeout=args.timeout)
        g, exp = traj.meta["baseline_g"], traj.meta["expansions"]
    wall_ms = (time.perf_counter() - t0) * 1e3
    errs = validate(traj, ctx.geom, m)
    if errs:  # a planner bug, not a user error
        raise RuntimeError("planner produced an invalid trajectory: " + "; ".join(errs[:3]))
    save_trajectory(traj, args.out)
    if trace is not None and args.trace:
        with open(args.trace, "w", encoding="ascii", newline="\n") as fh:
            fh.write(trace.to_csv())
    met = evaluate(traj, m)
    row_ = {"instance_id": 0, "algorithm": args.algo, "H": cfg.H if args.algo == "splash" else
            (0 if args.algo == "split" else None), "iteration": iteration, "N": met.N, "sum_p": met.sum_p,
            "p_bar": met.p_bar, "solution_g": g, "motion_cost_s": met.motion_cost, "plan_wall_ms": wall_ms,
            "expansions": exp, "error": ""}
    print(",".join(_fmt(row_[f]) for f in RESULT_FIELDS))
    return EXIT_OK


def cmd_render(args) -> int:
    cfg = _config(args)
    m = load_map(args.map)
    traj = load_trajectory(args.traj) if args.traj else None
    svg = render_svg(m, traj, cfg.geometry(), window=args.window, scale=args.scale)
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write(svg)
    print(args.out)
    return EXIT_OK


def _parse_H(text: str) -> List[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"--H: malformed list {text!r}") from None
    if not vals:
        raise UsageError("--H: empty list")
    return vals


def cmd_bench(args) -> int:
    cfg = _config(args)
    H_values = _parse_H(args.H)
    if any(h < 0 or h > cfg.h_max for h in H_values):
        raise UsageError(f"--H values must lie in [0, {cfg.h_max}]")
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    bad = [a for a in algos if a not in ("splash", "split", "joint-baseline")]
    if bad:
        raise UsageError(f"--algos: unknown algorithm(s) {bad}")
    if args.maps < 1 or args.pairs < 1:
        raise UsageError("--maps and --pairs must be >= 1")
    if args.deterministic:
        cfg = deterministic_config(cfg, args.split_iterations, args.baseline_expansions)
    maps = [gen_decayed_map(args.seed * 1000 + k, args.size, args.size, args.minutes, None, cfg)[0]
            for k in range(args.maps)]
    iset = make_instances(maps, args.pairs, args.seed, cfg)
    res = run_sweep(iset, algos, cfg, H_values, workers=args.workers, record_timing=not args.deterministic)
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write(res.to_csv())
    if args.trace_out:
        with open(args.trace_out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(res.trace_csv())
    print(f"wrote {len(res.rows)} rows to {args.out}")
    for k, v in summarize(res).items():
        print(f"{k}: {json.dumps(v, sort_keys=True)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sensorplan", description="Joint robot and pan-sensor coverage planning.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-map", help="simulate map decay and write ccmap snapshots")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--height", type=int, default=100)
    p.add_argument("--cell-size", type=float, default=1.0)
    p.add_argument("--minutes", type=float, default=10.0)
    p.add_argument("--snapshots", type=int, default=1, help="evenly spaced snapshots ending at the last tick")
    p.add_argument("--times", help="explicit snapshot times in seconds, comma separated")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--prefix", default="map")
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_map)

    p = sub.add_parser("gen-prims", help="generate and save the motion primitive library")
    p.add_argument("--out", required=True)
    p.add_argument("--cell-size", type=float, default=1.0)
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen_prims)

    p = sub.add_parser("plan", help="plan one trajectory")
    p.add_argument("--algo", choices=("splash", "split", "joint-baseline"), default="splash")
    p.add_argument("--map", required=True)
    p.add_argument("--start", required=True, help="col,row,heading_bin,speed_level")
    p.add_argument("--goal", required=True, help="col,row")
    p.add_argument("--H", type=int)
    p.add_argument("--psi0", type=int)
    p.add_argument("--timeout", type=float, help="budget in seconds for split / joint-baseline")
    p.add_argument("--out", default="plan.traj")
    p.add_argument("--trace", help="write the split iteration trace CSV here")
    p.add_argument("--config")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("render", help="render a map and optional trajectory to SVG")
    p.add_argument("--map", required=True)
    p.add_argument("--traj")
    p.add_argument("--out", default="plan.svg")
    p.add_argument("--window", type=int, default=1, help="history window for overlap shading")
    p.add_argument("--scale", type=float, default=6.0, help="pixels per cell")
    p.add_argument("--config")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("bench", help="run the benchmark sweep")
    p.add_argument("--maps", type=int, default=20)
    p.add_argument("--pairs", type=int, default=10)
    p.add_argument("--H", default="0,3,5")
    p.add_argument("--algos", default="splash,split,joint-baseline")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=100, help="map side in cells")
    p.add_argument("--minutes", type=float, default=10.0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deterministic", action="store_true",
                   help="replace wall-clock budgets by iteration/expansion caps and blank timing columns")
    p.add_argument("--split-iterations", type=int, default=2)
    p.add_argument("--baseline-expansions", type=int, default=20_000)
    p.add_argument("--out", default="results.csv")
    p.add_argument("--trace-out")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoPathError as exc:
        print(f"no path: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except (OSError, MapFormatError, TrajectoryFormatError, PrimitiveFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
