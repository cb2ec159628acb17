import sys

import numpy as np
import pytest

from sensorplan.config import PlannerConfig
from sensorplan.coverage_map import CoverageMap

# Small joint graph: 4 headings, one speed, 2 s primitives, 4 pan bins, 12 s horizon.
TINY = PlannerConfig(n_theta=4, speeds=(1.0,), duration=2, turn_rate_max=3.0, a_max=6.0,
                     heading_changes=(0, -1, 1), n_psi=4, rect_length=2.0, rect_width=1.0, offset=1.0,
                     t_max=12, r_min=0.5, dubins_final_headings=4, split_horizon_slack=100, lam=10.0,
                     split_timeout=3600.0)


def random_map(rng, width, height, lifetime=(20, 120), max_age=200, nc_frac=0.15, cell_size=1.0):
    cov = rng.random((height, width)) >= nc_frac
    life = rng.integers(lifetime[0], lifetime[1] + 1, (height, width))
    age = rng.integers(0, max_age + 1, (height, width))
    life = np.where(cov, life, 0)
    age = np.where(cov, age, 0)
    return CoverageMap(cov, life, age, cell_size, 0)


@pytest.fixture(scope="session")
def cfg():
    return PlannerConfig()


@pytest.fixture(scope="session")
def lib(cfg):
    return cfg.library(1.0)


@pytest.fixture(scope="session")
def tiny_cfg():
    return TINY


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_waypoints(rng, L, width, height, margin=3.0, step=1.5):
    """A wandering 1 s waypoint sequence (x, y, theta, t) that stays inside the map."""
    x, y = rng.uniform(margin, width - margin), rng.uniform(margin, height - margin)
    th = rng.uniform(0, 2 * np.pi)
    out = [(x, y, th, 0)]
    for t in range(1, L):
        th += rng.normal(0, 0.4)
        x = float(np.clip(x + step * np.cos(th), margin, width - margin))
        y = float(np.clip(y + step * np.sin(th), margin, height - margin))
        out.append((x, y, th, t))
    return out


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
