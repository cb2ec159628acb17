"""Planner configuration and the flat ``config v1`` key=value file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from functools import lru_cache
from typing import Optional, Tuple

from .costs import CostParams
from .footprint import SensorGeometry
from .lattice import LatticeParams, PrimitiveLibrary, generate_primitives

CONFIG_MAGIC = "config"
CONFIG_VERSION = "v1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PlannerConfig:
    # costs
    lam: float = 100.0
    w_motion: float = 1.0
    w_sensor: float = 1.0
    # sensor footprint
    rect_length: float = 6.0
    rect_width: float = 4.0
    offset: float = 5.0
    n_psi: int = 16
    pan_min: int = -1  # hard pan limits (bins) when both >= 0
    pan_max: int = -1
    # lattice
    n_theta: int = 16
    speeds: Tuple[float, ...] = (0.0, 5.0, 10.0)
    a_max: float = 2.5
    turn_rate_max: float = 0.6
    turn_check_speed: float = 1.0
    duration: int = 4
    heading_changes: Tuple[int, ...] = (0, -1, 1, -2, 2)
    # robot search
    w1: float = 2.0
    w2: float = 2.0
    r_min: float = 20.0
    dubins_final_headings: int = 16
    t_max: int = 200
    robot_timeout: float = 10.0
    # sensor search
    H: int = 3
    h_max: int = 5
    # SPLIT
    split_timeout: float = 30.0
    split_max_iterations: int = 0  # 0 = until budget or fixed point
    split_horizon_slack: int = 8
    split_reanchor: bool = False
    split_strict_goal: bool = False
    split_history: int = 0  # history inside refinement; only 0 is implemented
    # joint baseline
    baseline_timeout: float = 20.0
    baseline_max_expansions: int = 0  # 0 = no cap
    # harness
    seed: int = 0
    nc_fraction: float = 0.15
    lifetime: int = 100
    sweep_speed: float = 5.0

    def __post_init__(self):
        if self.H < 0 or self.H > self.h_max:
            raise ConfigError(f"H must lie in [0, {self.h_max}]")
        if self.split_history != 0:
            raise ConfigError("split_history > 0 is not supported (refinement uses the no-history cost)")
        if (self.pan_min >= 0) != (self.pan_max >= 0) or self.pan_min > self.pan_max:
            raise ConfigError("pan_min/pan_max must both be set (and ordered) or both be -1")
        if self.t_max <= 0 or self.split_timeout < 0 or self.baseline_timeout < 0:
            raise ConfigError("horizons and timeouts must be positive")
        try:
            self.cost_params()
            self.geometry()
            self.lattice_params(1.0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def cost_params(self) -> CostParams:
        return CostParams(self.lam, self.w_motion, self.w_sensor)

    def geometry(self) -> SensorGeometry:
        return SensorGeometry(self.rect_length, self.rect_width, self.offset, self.n_psi)

    def lattice_params(self, cell_size: float) -> LatticeParams:
        return LatticeParams(self.n_theta, tuple(float(v) for v in self.speeds), self.a_max,
                             self.turn_rate_max, self.turn_check_speed, self.duration,
                             float(cell_size), tuple(self.heading_changes))

    def library(self, cell_size: float) -> PrimitiveLibrary:
        return _library(self.lattice_params(cell_size))

    @property
    def pan_limits(self) -> Optional[Tuple[int, int]]:
        return (self.pan_min, self.pan_max) if self.pan_min >= 0 else None

    def replace(self, **kw) -> "PlannerConfig":
        return dataclasses.replace(self, **kw)


@lru_cache(maxsize=8)
def _library(params: LatticeParams) -> PrimitiveLibrary:
    return generate_primitives(params)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dumps_config(cfg: PlannerConfig) -> str:
    lines = [f"{CONFIG_MAGIC} {CONFIG_VERSION}"]
    for f in fields(cfg):
        lines.append(f"{f.name}={_fmt(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def _parse(name: str, default, raw: str):
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(default, tuple):
        kind = type(default[0]) if default else float
        return tuple(kind(x) for x in raw.split(",") if x.strip())
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def loads_config(text: str, base: Optional[PlannerConfig] = None) -> PlannerConfig:
    lines = text.splitlines()
    if not lines or lines[0].split() != [CONFIG_MAGIC, CONFIG_VERSION]:
        raise ConfigError("line 1: expected 'config v1' header")
    base = base or PlannerConfig()
    defaults = {f.name: getattr(base, f.name) for f in fields(base)}
    values = {}
    for n, ln in enumerate(lines[1:], start=2):
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        if "=" not in ln:
            raise ConfigError(f"line {n}: expected key=value")
        k, v = (s.strip() for s in ln.split("=", 1))
        if k not in defaults:
            raise ConfigError(f"line {n}: unknown key {k!r}")
        try:
            values[k] = _parse(k, defaults[k], v)
        except ValueError as exc:
            raise ConfigError(f"line {n}: bad value for {k}: {exc}") from None
    return dataclasses.replace(base, **values)


def load_config(path) -> PlannerConfig:
    with open(path, encoding="ascii") as fh:
        return loads_config(fh.read())


def save_config(cfg: PlannerConfig, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_config(cfg))
