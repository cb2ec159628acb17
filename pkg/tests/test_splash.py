import math

import pytest

from sensorplan.config import PlannerConfig
from sensorplan.costs import cost_no_history, cost_with_history
from sensorplan.coverage_map import CoverageMap
from sensorplan.lattice import RobotState
from sensorplan.splash import NoPathError, PlanContext, plan_sensor, splash
from sensorplan.trajectory import validate

from conftest import random_map, random_waypoints
from oracles import sensor_brute_force

CFG8 = PlannerConfig(n_psi=8)


def replay_cost(traj, m, H, lam):
    """History-aware coverage cost recomputed from the stored footprints."""
    fps = traj.footprints()
    total = 0.0
    for k in range(1, len(fps)):
        hist = set()
        for j in range(max(0, k - H), k):
            hist |= fps[j].cells
        total += cost_with_history(fps[k], hist, m, lam)
    return total


@pytest.mark.parametrize("H", [0, 1, 2])
def test_sensor_plan_matches_brute_force(H, rng):
    for _ in range(12):
        m = random_map(rng, 30, 30)
        ctx = PlanContext(m, CFG8)
        L = int(rng.integers(2, 9))
        wps = random_waypoints(rng, L, 30, 30)
        psi0 = int(rng.integers(0, 8))
        sp = plan_sensor(wps, psi0, H, ctx)
        best, argmins = sensor_brute_force(wps, psi0, H, ctx.geom, m, CFG8.lam)
        assert sp.cost == best
        assert sp.psis in argmins  # the constant shift leaves the argmin set unchanged


def test_uniform_map_keeps_initial_pan():
    m = CoverageMap.uniform(60, 60, 100)
    ctx = PlanContext(m, CFG8)
    wps = [(20.5 + k, 30.5, 0.0, k) for k in range(8)]
    sp = plan_sensor(wps, 0, 2, ctx)
    assert sp.psis == [0] * 8


def test_single_waypoint():
    m = CoverageMap.uniform(20, 20, 100)
    sp = plan_sensor([(10.5, 10.5, 0.0, 0)], 3, 0, PlanContext(m, CFG8))
    assert sp.psis == [3] and sp.cost == 0.0


def test_plan_sensor_argument_errors():
    ctx = PlanContext(CoverageMap.uniform(20, 20, 100), CFG8)
    with pytest.raises(ValueError):
        plan_sensor([], 0, 0, ctx)
    with pytest.raises(ValueError):
        plan_sensor([(10.5, 10.5, 0.0, 0)], 0, CFG8.h_max + 1, ctx)


def test_start_in_goal_cell():
    m = CoverageMap.uniform(30, 30, 100)
    ctx = PlanContext(m, CFG8)
    traj = splash(RobotState(10, 12, 0, 0), (12, 10), ctx, H=1)
    assert len(traj) == 1 and traj.primitives == [] and traj.motion_cost == 0.0 and traj.sensor_cost == 0.0


def test_straight_corridor_of_ten_primitives():
    m = CoverageMap.uniform(460, 30, 100)
    ctx = PlanContext(m, CFG8)
    traj = splash(RobotState(20, 15, 0, 2), (15, 420), ctx, H=0)
    assert traj.motion_cost == 40.0 and len(traj.primitives) == 10 and len(traj) == 41


def test_goal_outside_map_rejected():
    ctx = PlanContext(CoverageMap.uniform(30, 30, 100), CFG8)
    with pytest.raises(ValueError):
        splash(RobotState(5, 5, 0, 0), (40, 5), ctx)


def test_robot_timeout_raises():
    m = CoverageMap.uniform(400, 400, 100)
    ctx = PlanContext(m, CFG8)
    with pytest.raises(NoPathError):
        splash(RobotState(10, 10, 8, 0), (390, 390), ctx, deadline=0.0)


def _instances(rng, n, size=80):
    # start at most at 5 m/s: at top speed a start near the border can have no feasible primitive
    out = []
    while len(out) < n:
        m = random_map(rng, size, size)
        s = RobotState(int(rng.integers(20, size - 20)), int(rng.integers(20, size - 20)),
                       int(rng.integers(0, 16)), int(rng.integers(0, 2)))
        goal = (int(rng.integers(15, size - 15)), int(rng.integers(15, size - 15)))
        if math.dist((s.row, s.col), goal) >= 8:
            out.append((m, s, goal))
    return out


def test_splash_invariants(rng):
    for m, s, goal in _instances(rng, 30):
        ctx = PlanContext(m, CFG8)
        H = int(rng.integers(0, 4))
        traj = splash(s, goal, ctx, H=H)
        assert validate(traj, ctx.geom, m) == []
        assert [st.t for st in traj.steps] == list(range(len(traj)))
        assert traj.steps[0].psi == ctx.default_psi0(s)
        assert m.cell_of(traj.steps[-1].x, traj.steps[-1].y) == goal
        assert traj.motion_cost == 4.0 * len(traj.primitives) == len(traj) - 1
        assert traj.sensor_cost == pytest.approx(replay_cost(traj, m, H, CFG8.lam), abs=1e-6)
        assert traj.meta["H"] == H and traj.meta["robot_expansions"] > 0


def test_h0_cost_is_no_history_replay(rng):
    for m, s, goal in _instances(rng, 10):
        traj = splash(s, goal, PlanContext(m, CFG8), H=0)
        want = math.fsum(cost_no_history(fp, m, CFG8.lam) for fp in traj.footprints()[1:])
        assert traj.sensor_cost == pytest.approx(want, abs=1e-6)


def test_optimal_cost_grows_with_history(rng):
    # history only adds non-negative age terms, so the optimum can only rise with H
    for m, s, goal in _instances(rng, 10):
        ctx = PlanContext(m, CFG8)
        base = splash(s, goal, ctx, H=0)
        wps = [(st.x, st.y, st.theta, st.t) for st in base.steps]
        costs = [plan_sensor(wps, base.steps[0].psi, H, ctx).cost for H in range(5)]
        assert all(a <= b + 1e-6 for a, b in zip(costs, costs[1:]))


def test_shift_does_not_change_argmin(rng):
    # every pan sequence has the same number of ticks, so adding a constant per tick is harmless
    m = random_map(rng, 30, 30, max_age=400)
    ctx = PlanContext(m, CFG8)
    assert ctx.costs.p_min < 0 and ctx.costs.shift > 0
    wps = random_waypoints(rng, 7, 30, 30)
    sp = plan_sensor(wps, 0, 1, ctx)
    best, argmins = sensor_brute_force(wps, 0, 1, ctx.geom, m, CFG8.lam)
    assert sp.psis in argmins
    assert sp.result.cost == pytest.approx(best + 6 * ctx.costs.shift, abs=1e-6)


def test_pan_limits_respected(rng):
    cfg = PlannerConfig(n_psi=8, pan_min=0, pan_max=2)
    m = random_map(rng, 30, 30)
    sp = plan_sensor(random_waypoints(rng, 8, 30, 30), 1, 1, PlanContext(m, cfg))
    assert all(0 <= q <= 2 for q in sp.psis)


def test_history_changes_choices_somewhere(rng):
    # on decayed maps the history term steers the pan away from re-covering cells
    diffs = 0
    for _ in range(15):
        m = random_map(rng, 30, 30, lifetime=(100, 100), max_age=100, nc_frac=0.0)
        ctx = PlanContext(m, CFG8)
        wps = random_waypoints(rng, 8, 30, 30, step=0.5)
        diffs += plan_sensor(wps, 0, 0, ctx).psis != plan_sensor(wps, 0, 3, ctx).psis
    assert diffs > 0
