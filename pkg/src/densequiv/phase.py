"""Edge-triangle plane: feasibility boundaries and the equivalence classification."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graphon import scallop_parameters

EQ_TOL = 1e-12
SCALLOP_TOL = 1e-9

COLORS = {
    "Equivalent": "#d62728",
    "Broken": "#b0b0b0",
    "Unknown": "#ffffff",
    "Infeasible": "#000000",
}


@dataclass(frozen=True)
class RegionPoint:
    t1: float
    t2: float
    verdict: str
    case: str


def scallop_lower_bound(t1: float) -> float:
    """Least triangle density at edge density ``t1 = 1/2 + eps``, ``eps`` in (0, 1/6).

    Equal to ``6 c^2 (1 - 2c)``, the homomorphism triangle density of the
    three-block minimiser.
    """
    if not 0.5 < t1 < 2 / 3:
        raise ValueError("scallop segment needs 1/2 < t1 < 2/3")
    c, _ = scallop_parameters(t1 - 0.5)
    return 6 * c * c * (1 - 2 * c)


def lower_boundary(t1: float) -> float:
    """Least achievable triangle density used for the feasibility test.

    0 up to 1/2, the scallop up to 2/3, then Goodman's bound ``t1 (2 t1 - 1)``,
    which is valid but not tight beyond 2/3.
    """
    if t1 <= 0.5:
        return 0.0
    if t1 < 2 / 3:
        return scallop_lower_bound(t1)
    return t1 * (2 * t1 - 1)


def upper_boundary(t1: float) -> float:
    """Kruskal-Katona bound ``t1 ** 1.5``."""
    return t1**1.5


def classify(t1: float, t2: float) -> RegionPoint:
    """Verdict and case label for an edge-triangle density pair."""
    if not (0 <= t1 <= 1 and 0 <= t2 <= 1):
        raise ValueError("densities must lie in [0, 1]")
    if t2 > upper_boundary(t1) + EQ_TOL or t2 < lower_boundary(t1) - EQ_TOL:
        return RegionPoint(t1, t2, "Infeasible", "infeasible")
    if t1 == 0 or t1 == 1:
        return RegionPoint(t1, t2, "Unknown", "degenerate")
    if abs(t2 - t1**3) <= EQ_TOL:
        return RegionPoint(t1, t2, "Equivalent", "II(a)")
    if t2 <= EQ_TOL and t1 <= 0.5:
        return RegionPoint(t1, t2, "Equivalent", "II(e)")
    if t2 >= 0.125:
        return RegionPoint(t1, t2, "Broken", "II(b)")
    if t1 <= 0.5:
        return RegionPoint(t1, t2, "Broken", "II(c)")
    if t1 < 2 / 3 and abs(t2 - scallop_lower_bound(t1)) <= SCALLOP_TOL:
        return RegionPoint(t1, t2, "Broken", "II(d)")
    return RegionPoint(t1, t2, "Unknown", "unknown")


def sweep(resolution: int) -> list[RegionPoint]:
    """Classify a uniform ``resolution x resolution`` grid, row-major in ``t2`` then ``t1``."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    grid = np.linspace(0.0, 1.0, resolution)
    return [classify(float(a), float(b)) for b in grid for a in grid]


def write_csv(points, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t1", "t2", "verdict", "case"])
        for p in points:
            w.writerow([f"{p.t1:.12g}", f"{p.t2:.12g}", p.verdict, p.case])


def _curve(fn, lo, hi, steps=200):
    xs = np.linspace(lo, hi, steps)
    return [(float(x), float(fn(x))) for x in xs]


def render_svg(points, width: int = 800, height: int = 600) -> str:
    """Self-contained SVG: one cell per grid node, boundary and equivalence curves on top."""
    pts = list(points)
    xs = sorted({p.t1 for p in pts})
    ys = sorted({p.t2 for p in pts})
    margin = 50
    pw, ph = width - 2 * margin, height - 2 * margin
    cw = pw / max(len(xs) - 1, 1)
    chh = ph / max(len(ys) - 1, 1)

    def sx(x):
        return margin + x * pw

    def sy(y):
        return height - margin - y * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]
    for p in pts:
        color = COLORS[p.verdict]
        if p.case == "II(d)":
            color = "#1f77b4"
        out.append(
            f'<rect x="{sx(p.t1) - cw / 2:.2f}" y="{sy(p.t2) - chh / 2:.2f}" width="{cw:.2f}" '
            f'height="{chh:.2f}" fill="{color}"><title>{p.t1:.4g},{p.t2:.4g} {p.verdict} {p.case}</title></rect>'
        )

    def poly(curve, color, w=2):
        d = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in curve)
        out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{w}"/>')

    poly(_curve(upper_boundary, 0, 1), "#1f77b4")
    poly(_curve(lambda x: 0.0, 0, 0.5), "#d62728", 3)
    poly(_curve(lambda x: lower_boundary(x), 0.5 + 1e-9, 1), "#1f77b4")
    poly(_curve(lambda x: x**3, 0, 1), "#d62728", 3)
    out.append(
        f'<rect x="{margin}" y="{margin}" width="{pw}" height="{ph}" fill="none" stroke="#000" stroke-width="1"/>'
    )
    out.append(f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="14">edge density</text>')
    out.append(
        f'<text x="16" y="{height / 2}" text-anchor="middle" font-size="14" '
        f'transform="rotate(-90 16 {height / 2})">triangle density</text>'
    )
    for tick in (0, 0.25, 0.5, 0.75, 1):
        out.append(f'<text x="{sx(tick)}" y="{height - margin + 16}" text-anchor="middle" font-size="11">{tick}</text>')
        out.append(f'<text x="{margin - 6}" y="{sy(tick) + 4}" text-anchor="end" font-size="11">{tick}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(points, path: str | Path, width: int = 800, height: int = 600) -> None:
    Path(path).write_text(render_svg(points, width, height))

