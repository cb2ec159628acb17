"""Static SVG rendering: priority heat layer, robot path, footprints and overlap shading."""

from __future__ import annotations

import math
import re
from typing import FrozenSet, List, Optional, Set

from .coverage_map import CellIndex, CoverageMap
from .footprint import SensorGeometry, footprint_overlap
from .trajectory import Trajectory

NC_FILL = "#9e9e9e"
OVERLAP_FILL = "#7b1fa2"


def overlap_cells(traj: Trajectory, window: int = 1) -> FrozenSet[CellIndex]:
    """Cells seen at step k that were already seen within the previous ``window`` steps."""
    if window < 1:
        return frozenset()
    fps = [s.footprint for s in traj.steps if s.footprint is not None]
    out: Set[CellIndex] = set()
    for k, fp in enumerate(fps):
        for j in range(max(0, k - window), k):
            out |= footprint_overlap(fp, fps[j])
    return frozenset(out)


def _heat(p: int, lo: int, hi: int) -> str:
    """Urgent (low priority) cells are red, fresh ones pale yellow."""
    f = 1.0 if hi == lo else (p - lo) / (hi - lo)
    r = 215 + round(40 * f)
    g = 48 + round(197 * f)
    b = 39 + round(140 * f)
    return f"#{r:02x}{g:02x}{b:02x}"


def _rect_corners(x, y, psi, geom: SensorGeometry):
    c, s = math.cos(psi), math.sin(psi)
    cx, cy = x + geom.offset * c, y + geom.offset * s
    hl, hw = geom.rect_length / 2, geom.rect_width / 2
    return [(cx + u * c - v * s, cy + u * s + v * c) for u, v in ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))]


def render_svg(m: CoverageMap, traj: Optional[Trajectory] = None, geom: Optional[SensorGeometry] = None,
               window: int = 1, scale: float = 6.0) -> str:
    """SVG text for ``m`` with an optional trajectory overlay; output is a pure function of the inputs."""
    geom = geom or SensorGeometry()
    cs = m.cell_size
    px = scale / cs  # pixels per metre
    W, H = m.width * scale, m.height * scale

    def X(x):
        return f"{x * px:.2f}"

    def Y(y):
        return f"{H - y * px:.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W:.0f}" height="{H:.0f}" '
           f'viewBox="0 0 {W:.0f} {H:.0f}">',
           f'<rect width="{W:.0f}" height="{H:.0f}" fill="white"/>',
           '<g id="heat" shape-rendering="crispEdges">']
    pri = m.priorities
    cov = m.coverage
    if cov.any():
        lo, hi = int(pri[cov].min()), int(pri[cov].max())
    else:
        lo = hi = 0
    for i in range(m.height):
        for j in range(m.width):
            fill = _heat(int(pri[i, j]), lo, hi) if cov[i, j] else NC_FILL
            out.append(f'<rect x="{j * scale:.2f}" y="{H - (i + 1) * scale:.2f}" width="{scale:.2f}" '
                       f'height="{scale:.2f}" fill="{fill}"/>')
    out.append("</g>")
    if traj is not None and traj.steps:
        out.append(f'<g id="overlap" fill="{OVERLAP_FILL}" fill-opacity="0.55" shape-rendering="crispEdges">')
        for i, j in sorted(overlap_cells(traj, window)):
            out.append(f'<rect x="{j * scale:.2f}" y="{H - (i + 1) * scale:.2f}" width="{scale:.2f}" '
                       f'height="{scale:.2f}"/>')
        out.append("</g>")
        out.append('<g id="footprints" fill="none" stroke="#1565c0" stroke-width="0.8" stroke-opacity="0.7">')
        for s in traj.steps:
            pts = " ".join(f"{X(a)},{Y(b)}" for a, b in _rect_corners(s.x, s.y, geom.psi_of(s.psi), geom))
            out.append(f'<polygon points="{pts}"/>')
        out.append("</g>")
        pts = " ".join(f"{X(s.x)},{Y(s.y)}" for s in traj.steps)
        out.append(f'<polyline id="path" points="{pts}" fill="none" stroke="black" stroke-width="1.6"/>')
        s0, s1 = traj.steps[0], traj.steps[-1]
        out.append(f'<circle id="start" cx="{X(s0.x)}" cy="{Y(s0.y)}" r="3" fill="#2e7d32"/>')
        out.append(f'<circle id="goal" cx="{X(s1.x)}" cy="{Y(s1.y)}" r="3" fill="#c62828"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def rendered_overlap(svg: str, m: CoverageMap, scale: float = 6.0) -> List[CellIndex]:
    """Parse the overlap layer of an SVG back into cell indices (for checking renders)."""
    seg = svg.split('<g id="overlap"', 1)
    if len(seg) < 2:
        return []
    body = seg[1].split("</g>", 1)[0]
    H = m.height * scale
    cells = []
    for xs, ys in re.findall(r'<rect x="([0-9.]+)" y="([0-9.]+)"', body):
        j = int(round(float(xs) / scale))
        i = int(round((H - float(ys)) / scale)) - 1
        cells.append((i, j))
    return cells
