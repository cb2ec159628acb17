"""Rasterization of the rectangular pan-sensor footprint onto the map grid."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import FrozenSet, Tuple

import numpy as np

from .coverage_map import CellIndex, CoverageMap

# Overlap below this (in cell units) counts as touching, not intersecting.
_EPS = 1e-9


@dataclass(frozen=True)
class SensorGeometry:
    rect_length: float = 6.0  # along psi
    rect_width: float = 4.0  # across psi
    offset: float = 5.0  # robot position -> rectangle center, along psi
    n_psi: int = 16  # psi_step = 2*pi / n_psi

    def __post_init__(self):
        if self.rect_length <= 0 or self.rect_width <= 0 or self.offset < 0:
            raise ValueError("footprint lengths must be positive")
        if self.n_psi < 1:
            raise ValueError("n_psi must be >= 1")

    @property
    def psi_step(self) -> float:
        return 2.0 * math.pi / self.n_psi

    @property
    def psi_rate(self) -> float:
        """Max pan rate: one psi step per second."""
        return self.psi_step

    def psi_of(self, bin_: int) -> float:
        return (bin_ % self.n_psi) * self.psi_step

    def max_cells(self, cell_size: float) -> int:
        """Upper bound on the number of cells any footprint can touch."""
        diag = math.hypot(self.rect_length, self.rect_width)
        side = math.ceil(diag / cell_size) + 1
        return side * side


@dataclass(frozen=True, eq=False)
class Footprint:
    rows: np.ndarray
    cols: np.ndarray
    pose: Tuple[float, float, float, float]  # (x, y, theta, psi)

    @property
    def cells(self) -> FrozenSet[CellIndex]:
        return frozenset(zip(self.rows.tolist(), self.cols.tolist()))

    def __len__(self) -> int:
        return len(self.rows)


def _sat_mask(cx, cy, psi, geom, cell_size, ii, jj):
    """Cells (ii, jj) whose interior meets the rectangle interior (separating axis test)."""
    c, s = math.cos(psi), math.sin(psi)
    hl, hw = geom.rect_length / 2.0, geom.rect_width / 2.0
    h = cell_size / 2.0
    eps = _EPS * cell_size
    # cell centers
    px = (jj + 0.5) * cell_size
    py = (ii + 0.5) * cell_size
    ex = hl * abs(c) + hw * abs(s)
    ey = hl * abs(s) + hw * abs(c)
    ok = (np.minimum(px + h, cx + ex) - np.maximum(px - h, cx - ex) > eps)
    ok &= (np.minimum(py + h, cy + ey) - np.maximum(py - h, cy - ey) > eps)
    # rectangle axes
    cu = h * (abs(c) + abs(s))
    pu = (px - cx) * c + (py - cy) * s
    pv = -(px - cx) * s + (py - cy) * c
    ok &= (np.minimum(pu + cu, hl) - np.maximum(pu - cu, -hl) > eps)
    ok &= (np.minimum(pv + cu, hw) - np.maximum(pv - cu, -hw) > eps)
    return ok


@lru_cache(maxsize=200_000)
def _pattern(fx: float, fy: float, psi: float, geom: SensorGeometry, cell_size: float):
    """Relative cell pattern for a robot at (fx, fy) inside the cell at the origin."""
    cx = fx + geom.offset * math.cos(psi)
    cy = fy + geom.offset * math.sin(psi)
    r = 0.5 * math.hypot(geom.rect_length, geom.rect_width)
    j0, j1 = math.floor((cx - r) / cell_size) - 1, math.floor((cx + r) / cell_size) + 1
    i0, i1 = math.floor((cy - r) / cell_size) - 1, math.floor((cy + r) / cell_size) + 1
    ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
    mask = _sat_mask(cx, cy, psi, geom, cell_size, ii, jj)
    drow = ii[mask].astype(np.int64)
    dcol = jj[mask].astype(np.int64)
    drow.setflags(write=False)
    dcol.setflags(write=False)
    return drow, dcol


def relative_pattern(x: float, y: float, psi: float, geom: SensorGeometry, cell_size: float):
    """Return (row0, col0, drow, dcol): footprint cells are (row0 + drow, col0 + dcol), unclipped."""
    col0 = math.floor(x / cell_size)
    row0 = math.floor(y / cell_size)
    fx = round(x - col0 * cell_size, 9)
    fy = round(y - row0 * cell_size, 9)
    psi = round(psi % (2.0 * math.pi), 12)
    drow, dcol = _pattern(fx, fy, psi, geom, float(cell_size))
    return row0, col0, drow, dcol


def clip(rows: np.ndarray, cols: np.ndarray, height: int, width: int):
    keep = (rows >= 0) & (rows < height) & (cols >= 0) & (cols < width)
    return rows[keep], cols[keep]


def footprint_cells(m: CoverageMap, x: float, y: float, psi: float, geom: SensorGeometry,
                    theta: float = 0.0) -> Footprint:
    """Cells whose square meets the sensor rectangle for a robot at (x, y).

    ``psi`` is the sensor heading in the world frame, so ``theta`` is carried along
    in the pose but does not change the cells.
    """
    if not m.contains_point(x, y):
        raise ValueError(f"robot position ({x}, {y}) outside the map")
    row0, col0, drow, dcol = relative_pattern(x, y, psi, geom, m.cell_size)
    rows, cols = clip(drow + row0, dcol + col0, m.height, m.width)
    return Footprint(rows, cols, (x, y, theta, psi))


def footprint_overlap(a: Footprint, b: Footprint) -> FrozenSet[CellIndex]:
    return a.cells & b.cells
