"""Microcanonical versus canonical ensembles of dense random graphs.

Exact finite-n enumeration, Lagrange multiplier fitting, the large-n
variational layer on step graphons, the edge-triangle classification and a
Metropolis sampler.
"""

from .errors import (
    Degenerate,
    DensequivError,
    HullBoundary,
    InfeasibleConstraint,
    NoConvergence,
    OutOfRegime,
)
from .exact import (
    StatTable,
    canonical_cov,
    canonical_mean,
    enumerate_graphs,
    micro_count,
    partition_log,
    snap_to_key,
)
from .fitting import fit_on_face, fit_theta, relative_entropy, sign_check, theta_trajectory
from .graphon import StepGraphon, cut_distance, density, rate_functional, rate_scalar, scallop_graphon
from .graphs import EDGE, TRIANGLE, WEDGE, LabeledGraph, SubgraphFamily, hom_count, hom_density, star, toggle_delta
from .mcmc import SamplerConfig, TraceSummary, averaging_check, run_chain
from .phase import classify, scallop_lower_bound, sweep
from .variational import invert_constraint, min_rate_on_levelset, s_inf, scalar_sup

__version__ = "0.1.0"
