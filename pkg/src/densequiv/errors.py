"""Exception types shared across the package."""


class DensequivError(Exception):
    """Base class for all package errors."""


class InfeasibleConstraint(DensequivError):
    """The requested constraint is not realised by any graph (or graphon)."""


class HullBoundary(DensequivError):
    """Target lies on or outside the boundary of the achievable density hull.

    The Lagrange multiplier diverges for such targets; use
    :func:`densequiv.fitting.fit_on_face` to fit on the minimal face instead.
    """


class Degenerate(DensequivError):
    """Covariance of the sufficient statistics is singular on the support."""


class NoConvergence(DensequivError):
    """An iterative solver ran out of iterations."""


class OutOfRegime(DensequivError):
    """The requested inversion is not backed by a unique global maximiser."""
