"""
The large-n variational problem
===============================

In the dense limit the canonical ensemble concentrates on maximisers of
theta . t(h) - I(h). When those are constant graphons the problem reduces to
one real variable, the limiting multiplier follows in closed form, and the
limiting relative entropy can be decided case by case.
"""

from densequiv import invert_constraint, min_rate_on_levelset, s_inf, scalar_sup
from densequiv.graphs import EDGE, TRIANGLE, star

# Triangle density 0.216 = 0.6^3 is reproduced by a unique constant maximiser.
inv = invert_constraint("triangle", 0.216)
print(f"theta_inf = {inv.theta:.6f}, u* = {inv.u_star}")

# A symmetric objective has two maximisers: the low-temperature coexistence.
print(scalar_sup([-3.0, 3.0], [1, 2]))

for args in [("triangle", 0.216), ("star", 0.49), ("edge-triangle", 0.4, 0.064), ("edge-triangle", 0.4, 0.2)]:
    kw = {"j": 2} if args[0] == "star" else {}
    v = s_inf(*args, **kw)
    print(f"{args}: {v.kind} [{v.case}]")

# Numerical minimisation of the rate on a level set recovers constant minimisers.
print("edge 0.3:", min_rate_on_levelset([EDGE], [0.3], blocks=3, restarts=4).value)
print("star2 0.49:", min_rate_on_levelset([star(2)], [0.49], blocks=3, restarts=4).value)
r = min_rate_on_levelset([EDGE, TRIANGLE], [0.5, 0.2], blocks=3, restarts=4)
print("edge-triangle (0.5, 0.2): rate", r.value, "\n", r.graphon.values.round(3))
