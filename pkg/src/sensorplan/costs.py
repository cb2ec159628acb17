"""Motion and sensor-coverage costs.

The coverage cost of a footprint is the sum of priorities of its coverage cells
plus ``lam * N_nc / |F|``. With a history window, coverage cells seen by one of
the last H footprints are charged their full lifetime instead of their priority.
Since ``lifetime - priority == age``, that is the no-history cost plus the ages
of the re-covered cells, which is how ``CostModel`` evaluates it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet

import numpy as np

from .coverage_map import CellIndex, CoverageMap
from .footprint import Footprint, SensorGeometry

REFINEMENT = "refinement"
BASELINE = "baseline"


@dataclass(frozen=True)
class CostParams:
    lam: float = 100.0
    w_motion: float = 1.0
    w_sensor: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.w_motion < 0 or self.w_sensor < 0:
            raise ValueError("weights must be >= 0")
        if self.w_motion == 0 and self.w_sensor == 0:
            raise ValueError("w_motion and w_sensor cannot both be zero")


def cost_no_history(F: Footprint, m: CoverageMap, lam: float = 100.0) -> float:
    n = len(F)
    if n == 0:
        return 0.0
    cov = m.coverage[F.rows, F.cols]
    pri = (m.lifetime - m.age)[F.rows, F.cols]
    return float(pri[cov].sum()) + lam * int((~cov).sum()) / n


def cost_with_history(F: Footprint, hist_cells: AbstractSet[CellIndex], m: CoverageMap,
                      lam: float = 100.0) -> float:
    n = len(F)
    if n == 0:
        return 0.0
    total = 0
    n_nc = 0
    for i, j in zip(F.rows.tolist(), F.cols.tolist()):
        if not m.coverage[i, j]:
            n_nc += 1
        elif (i, j) in hist_cells:
            total += int(m.lifetime[i, j])
        else:
            total += int(m.lifetime[i, j] - m.age[i, j])
    return float(total) + lam * n_nc / n


def edge_cost_joint(footprint_cost: float, params: CostParams, mode: str, dt: float = 1.0) -> float:
    """Cost of one 1 s joint-space tick.

    ``refinement`` charges only the sensor coverage cost; ``baseline`` mixes in
    ``dt`` seconds of motion time.
    """
    if mode == REFINEMENT:
        return footprint_cost
    if mode == BASELINE:
        return params.w_motion * dt + params.w_sensor * footprint_cost
    raise ValueError(f"unknown edge cost mode {mode!r}")


class CostModel:
    """Footprint costs over a frozen map snapshot, on raw (rows, cols) index arrays."""

    def __init__(self, m: CoverageMap, geom: SensorGeometry, lam: float = 100.0):
        self.map = m
        self.geom = geom
        self.lam = float(lam)
        self.height, self.width = m.height, m.width
        pri = np.where(m.coverage, m.lifetime - m.age, 0).astype(np.int64)
        self._pri_flat = pri.ravel()
        self._nc_flat = (~m.coverage).ravel().astype(np.int64)
        self._age_flat = np.where(m.coverage, m.age, 0).astype(np.int64).ravel()
        cov_pri = pri[m.coverage]
        self.p_min = int(cov_pri.min()) if cov_pri.size else 0
        self.max_cells = geom.max_cells(m.cell_size)
        self.shift = self.max_cells * abs(self.p_min) + self.lam
        # lowest possible shifted tick cost; non-negative by construction
        self.min_shifted = self.shift + self.max_cells * min(self.p_min, 0)

    def flat(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return rows * self.width + cols

    def eq1_flat(self, idx: np.ndarray) -> float:
        n = idx.size
        if n == 0:
            return 0.0
        return float(self._pri_flat[idx].sum()) + self.lam * int(self._nc_flat[idx].sum()) / n

    def eq2_flat(self, idx: np.ndarray, hist: AbstractSet[int]) -> float:
        """No-history cost plus ages of coverage cells already in ``hist`` (flat indices)."""
        n = idx.size
        if n == 0:
            return 0.0
        total = int(self._pri_flat[idx].sum())
        if hist:
            age = self._age_flat
            for k in hist.intersection(idx.tolist()):
                total += int(age[k])
        return float(total) + self.lam * int(self._nc_flat[idx].sum()) / n
