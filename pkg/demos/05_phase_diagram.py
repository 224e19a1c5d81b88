"""
The edge-triangle phase diagram
===============================

Each feasible (edge, triangle) density pair is classified as equivalent,
broken or unknown. A sweep over the unit square writes a CSV table and an SVG
picture of the regions together with the feasibility boundaries.
"""

from collections import Counter
from pathlib import Path

from densequiv.phase import classify, sweep, write_csv, write_svg

for t1, t2 in [(0.5, 0.125), (0.3, 0.0), (0.5, 0.05), (0.4, 0.2), (0.55, 0.1), (0.9, 0.1)]:
    p = classify(t1, t2)
    print(f"({t1}, {t2}): {p.verdict} [{p.case}]")

points = sweep(101)
print(Counter(p.verdict for p in points))

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)
write_csv(points, out / "region.csv")
write_svg(sweep(201), out / "region.svg")
print("wrote", out / "region.csv", "and", out / "region.svg")
