"""
Step graphons, the rate functional and the scallop minimiser
============================================================

Step graphons carry the large-n side of the story. Homomorphism densities are
exact block sums, the cut distance is computed by a subset scan, and the
three-block scallop graphon realises the least triangle density at edge
density 1/2 + eps.
"""

from fractions import Fraction

from densequiv.graphon import (
    StepGraphon,
    cut_distance,
    density,
    rate_functional,
    scallop_graphon,
    scallop_parameters_exact,
)
from densequiv.graphs import EDGE, TRIANGLE

half = StepGraphon.constant(0.5)
bipartite = StepGraphon.equal_blocks([[0, 1], [1, 0]])
print("t(triangle, 1/2) =", density(TRIANGLE, half))
print("t(edge, bipartite) =", density(EDGE, bipartite), " t(triangle) =", density(TRIANGLE, bipartite))
print("cut distance bipartite vs constant 1/2:", cut_distance(bipartite, half))
print("I(bipartite) =", rate_functional(bipartite), " I(1/2) =", rate_functional(half))

# eps = 1/8 gives rational parameters c = 5/12 and p = 40/49.
print("exact (c, p) at eps = 1/8:", scallop_parameters_exact(Fraction(1, 8)))
sc = scallop_graphon(1 / 8)
print("edge density", density(EDGE, sc.graphon), " triangle density", density(TRIANGLE, sc.graphon))
print("rate", rate_functional(sc.graphon))
