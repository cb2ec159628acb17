"""Decaying priority grid.

Every coverage cell carries a lifetime and an age; its priority is
``lifetime - age`` and drops by one per second of simulated time.
No-coverage cells share the same grid and are flagged by ``coverage == False``.

Maps are treated as values: ``decay`` and ``mark_covered`` return new maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

CellIndex = Tuple[int, int]  # (row, col)

MAP_MAGIC = "ccmap"
MAP_VERSION = "v1"


class MapFormatError(ValueError):
    """Raised for malformed ``ccmap`` files, with line/column context."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class CoverageMap:
    coverage: np.ndarray  # bool (height, width); False = no-coverage cell
    lifetime: np.ndarray  # int64 (height, width)
    age: np.ndarray  # int64 (height, width)
    cell_size: float = 1.0
    clock: int = 0

    def __post_init__(self):
        cov = np.asarray(self.coverage, dtype=bool)
        life = np.asarray(self.lifetime, dtype=np.int64)
        age = np.asarray(self.age, dtype=np.int64)
        if cov.ndim != 2 or cov.shape != life.shape or cov.shape != age.shape:
            raise ValueError("coverage, lifetime and age must be 2-D arrays of equal shape")
        if cov.shape[0] < 1 or cov.shape[1] < 1:
            raise ValueError("map must have at least one cell")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if (life < 0).any() or (age < 0).any():
            raise ValueError("lifetime and age must be non-negative")
        # no-coverage cells carry lifetime = age = 0
        life = np.where(cov, life, 0)
        age = np.where(cov, age, 0)
        object.__setattr__(self, "coverage", _frozen(cov))
        object.__setattr__(self, "lifetime", _frozen(life))
        object.__setattr__(self, "age", _frozen(age))
        object.__setattr__(self, "clock", int(self.clock))

    @classmethod
    def uniform(cls, width: int, height: int, lifetime: int = 100, cell_size: float = 1.0,
                clock: int = 0) -> "CoverageMap":
        shape = (height, width)
        return cls(np.ones(shape, bool), np.full(shape, lifetime, np.int64),
                   np.zeros(shape, np.int64), cell_size, clock)

    @property
    def height(self) -> int:
        return self.coverage.shape[0]

    @property
    def width(self) -> int:
        return self.coverage.shape[1]

    @property
    def priorities(self) -> np.ndarray:
        """Priority grid; no-coverage cells read 0."""
        return self.lifetime - self.age

    def in_bounds(self, c: CellIndex) -> bool:
        i, j = c
        return 0 <= i < self.height and 0 <= j < self.width

    def _check(self, c: CellIndex) -> None:
        if not self.in_bounds(c):
            raise IndexError(f"cell {c} outside {self.height}x{self.width} map")

    def in_coverage_zone(self, c: CellIndex) -> bool:
        self._check(c)
        return bool(self.coverage[c])

    def priority(self, c: CellIndex) -> int:
        self._check(c)
        if not self.coverage[c]:
            raise ValueError(f"cell {c} is a no-coverage cell and has no priority")
        return int(self.lifetime[c] - self.age[c])

    def decay(self, dt: int) -> "CoverageMap":
        if dt < 0 or int(dt) != dt:
            raise ValueError("dt must be a non-negative integer number of seconds")
        dt = int(dt)
        if dt == 0:
            return self
        age = np.where(self.coverage, self.age + dt, 0)
        return CoverageMap(self.coverage, self.lifetime, age, self.cell_size, self.clock + dt)

    def mark_covered(self, cells: Iterable[CellIndex]) -> "CoverageMap":
        cells = list(cells)
        for c in cells:
            self._check(c)
        if not cells:
            return self
        rows, cols = np.array(cells, dtype=np.int64).T
        age = self.age.copy()
        age[rows, cols] = 0
        return CoverageMap(self.coverage, self.lifetime, age, self.cell_size, self.clock)

    def same_state(self, other: "CoverageMap") -> bool:
        return (self.cell_size == other.cell_size and self.clock == other.clock
                and np.array_equal(self.coverage, other.coverage)
                and np.array_equal(self.lifetime, other.lifetime)
                and np.array_equal(self.age, other.age))

    def cell_of(self, x: float, y: float) -> CellIndex:
        """Cell containing the world point (x, y); x runs along columns."""
        return int(np.floor(y / self.cell_size)), int(np.floor(x / self.cell_size))

    def contains_point(self, x: float, y: float) -> bool:
        return 0.0 <= x < self.width * self.cell_size and 0.0 <= y < self.height * self.cell_size


def priority(m: CoverageMap, c: CellIndex) -> int:
    return m.priority(c)


def decay(m: CoverageMap, dt: int) -> CoverageMap:
    return m.decay(dt)


def mark_covered(m: CoverageMap, cells: Iterable[CellIndex]) -> CoverageMap:
    return m.mark_covered(cells)


def in_coverage_zone(m: CoverageMap, c: CellIndex) -> bool:
    return m.in_coverage_zone(c)


# --- ccmap v1 text format -------------------------------------------------

def dumps_map(m: CoverageMap) -> str:
    lines = [f"{MAP_MAGIC} {MAP_VERSION} {m.width} {m.height} {m.cell_size:g} {m.clock}"]
    for i in range(m.height):
        toks = []
        for j in range(m.width):
            if m.coverage[i, j]:
                toks.append(f"{m.lifetime[i, j]}:{m.age[i, j]}")
            else:
                toks.append("NC")
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def loads_map(text: str) -> CoverageMap:
    lines = text.splitlines()
    if not lines:
        raise MapFormatError("line 1: empty file")
    head = lines[0].split()
    if len(head) != 6 or head[0] != MAP_MAGIC:
        raise MapFormatError(f"line 1: expected '{MAP_MAGIC} v1 <width> <height> <cell_size_m> <clock>'")
    if head[1] != MAP_VERSION:
        raise MapFormatError(f"line 1: unsupported map version {head[1]!r}")
    try:
        width, height = int(head[2]), int(head[3])
        cell_size = float(head[4])
        clock = int(head[5])
    except ValueError as exc:
        raise MapFormatError(f"line 1: bad header value ({exc})") from None
    if width < 1 or height < 1 or cell_size <= 0 or clock < 0:
        raise MapFormatError("line 1: width/height must be >= 1, cell_size > 0, clock >= 0")
    rows = [ln for ln in lines[1:]]
    while rows and not rows[-1].strip():
        rows.pop()
    if len(rows) != height:
        raise MapFormatError(f"line {len(rows) + 2}: expected {height} rows, found {len(rows)}")
    cov = np.zeros((height, width), bool)
    life = np.zeros((height, width), np.int64)
    age = np.zeros((height, width), np.int64)
    for i, ln in enumerate(rows):
        toks = ln.split()
        lineno = i + 2
        if len(toks) != width:
            raise MapFormatError(f"line {lineno}: expected {width} cells, found {len(toks)}")
        for j, tok in enumerate(toks):
            if tok == "NC":
                continue
            parts = tok.split(":")
            if len(parts) != 2 or not parts[0].isdigit() or not parts[1].isdigit():
                raise MapFormatError(f"line {lineno}, column {j + 1}: malformed cell token {tok!r}")
            cov[i, j] = True
            life[i, j] = int(parts[0])
            age[i, j] = int(parts[1])
    return CoverageMap(cov, life, age, cell_size, clock)


def save_map(m: CoverageMap, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_map(m))


def load_map(path) -> CoverageMap:
    with open(path, encoding="ascii") as fh:
        return loads_map(fh.read())
