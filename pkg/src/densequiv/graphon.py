"""Step graphons: densities, the rate functional and the cut distance.

Every graphon here is block-constant, so all integrals are finite sums. Widths
and values may be float arrays or object arrays of :class:`fractions.Fraction`
(exact arithmetic); the density routines work with either.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .graphs import LabeledGraph, SubgraphFamily

EXACT_CUT_BLOCKS = 20
HEURISTIC_RESTARTS = 32


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Block-constant symmetric kernel on the unit square.

    Block ``a`` occupies an interval of length ``widths[a]``; the kernel equals
    ``values[a, b]`` on block ``a`` x block ``b``.
    """

    widths: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.widths)
        v = np.asarray(self.values)
        if w.dtype != object:
            w = w.astype(float)
        if v.dtype != object:
            v = v.astype(float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("widths must be a non-empty vector")
        if v.shape != (w.size, w.size):
            raise ValueError(f"values must be {w.size}x{w.size}, got {v.shape}")
        if any(x <= 0 for x in w):
            raise ValueError("block widths must be positive")
        if abs(sum(w) - 1) > 1e-12:
            raise ValueError(f"widths sum to {float(sum(w))!r}, not 1")
        if any(x < 0 or x > 1 for x in v.ravel()):
            raise ValueError("graphon values must lie in [0, 1]")
        if not all(v[a, b] == v[b, a] for a in range(w.size) for b in range(a)):
            raise ValueError("values must be symmetric")
        object.__setattr__(self, "widths", w)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.widths.size

    @classmethod
    def constant(cls, p: float) -> "StepGraphon":
        return cls(np.array([1.0]), np.array([[p]]))

    @classmethod
    def equal_blocks(cls, values) -> "StepGraphon":
        v = np.asarray(values, dtype=float)
        return cls(np.full(v.shape[0], 1.0 / v.shape[0]), v)

    def __repr__(self) -> str:
        return f"StepGraphon(k={self.k}, widths={self.widths!r}, values={self.values!r})"


def graphon_of_graph(graph: LabeledGraph, exact: bool = False) -> StepGraphon:
    """Empirical graphon of a graph: ``n`` blocks of width ``1/n``, 0/1 values."""
    n = graph.n
    mat = graph.to_matrix()
    if exact:
        w = np.array([Fraction(1, n)] * n, dtype=object)
        v = np.array([[Fraction(x) for x in row] for row in mat], dtype=object)
    else:
        w = np.full(n, 1.0 / n)
        v = np.array(mat, dtype=float)
    return StepGraphon(w, v)


def density(family: SubgraphFamily, h: StepGraphon):
    """Homomorphism density ``t(F, h)`` by exact block summation."""
    w, v = h.widths, h.values
    if family.kind == "edge":
        return w @ v @ w
    if family.kind == "triangle":
        m = w[:, None] * v
        return np.trace(m @ m @ m)
    deg = v @ w
    return sum(w * deg**family.star_exponent)


def densities(families, h: StepGraphon) -> np.ndarray:
    return np.array([float(density(f, h)) for f in families])


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)


def rate_scalar(u, p: float | None = None):
    """Per-edge rate ``I_p(u)`` (or ``I(u)`` when ``p`` is None), with ``0 log 0 = 0``.

    Accepts scalars or arrays.
    """
    arr = np.asarray(u, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("u must lie in [0, 1]")
    val = 0.5 * _xlogx(arr) + 0.5 * _xlogx(1.0 - arr)
    if p is not None:
        if not 0 < p < 1:
            raise ValueError("p must lie in (0, 1)")
        val = val - 0.5 * arr * math.log(p) - 0.5 * (1.0 - arr) * math.log1p(-p)
    return float(val) if np.ndim(val) == 0 else val


def rate_derivative(u):
    """``dI/du = log(u / (1 - u)) / 2`` (infinite at the endpoints)."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        out = 0.5 * (np.log(u) - np.log1p(-u))
    return float(out) if out.ndim == 0 else out


def rate_functional(h: StepGraphon, p: float | None = None) -> float:
    """``I_p(h)`` (or ``I(h)``): the rate integrand summed over blocks."""
    w = np.asarray(h.widths, dtype=float)
    v = np.asarray(h.values, dtype=float)
    return float(w @ rate_scalar(v, p) @ w)


def common_refinement(h1: StepGraphon, h2: StepGraphon):
    """Re-express two step graphons over the union of their block boundaries.

    Returns ``(widths, values1, values2)`` as float arrays.
    """
    c1 = np.concatenate([[0.0], np.cumsum(np.asarray(h1.widths, dtype=float))])
    c2 = np.concatenate([[0.0], np.cumsum(np.asarray(h2.widths, dtype=float))])
    c1[-1] = c2[-1] = 1.0
    cuts = np.unique(np.concatenate([c1, c2]))
    # merge cut points closer than rounding noise
    keep = np.concatenate([[True], np.diff(cuts) > 1e-13])
    cuts = cuts[keep]
    cuts[-1] = 1.0
    widths = np.diff(cuts)
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    i1 = np.clip(np.searchsorted(c1, mids, side="right") - 1, 0, h1.k - 1)
    i2 = np.clip(np.searchsorted(c2, mids, side="right") - 1, 0, h2.k - 1)
    v1 = np.asarray(h1.values, dtype=float)[np.ix_(i1, i1)]
    v2 = np.asarray(h2.values, dtype=float)[np.ix_(i2, i2)]
    return widths, v1, v2


def _subset_masks(k: int, start: int, stop: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(k)) & 1).astype(float)


def cut_norm_exact(weighted: np.ndarray) -> float:
    """Exact cut norm of a block matrix ``M[a, b] = w_a w_b D[a, b]``.

    Scans every row subset S; the best column set is then read off blockwise from
    the sign of the S-marginal.
    """
    k = weighted.shape[0]
    best = 0.0
    chunk = 1 << 14
    for start in range(0, 1 << k, chunk):
        rows = _subset_masks(k, start, min(start + chunk, 1 << k))
        marg = rows @ weighted
        pos = np.where(marg > 0, marg, 0.0).sum(axis=1)
        neg = np.where(marg < 0, -marg, 0.0).sum(axis=1)
        best = max(best, float(pos.max()), float(neg.max()))
    return best


def cut_norm_heuristic(weighted: np.ndarray, restarts: int = HEURISTIC_RESTARTS, seed: int = 0) -> float:
    """Alternating maximisation over row/column subsets; a lower bound on the cut norm."""
    rng = np.random.default_rng(seed)
    k = weighted.shape[0]
    best = 0.0
    for r in range(restarts):
        for sign in (1.0, -1.0):
            m = sign * weighted
            s = rng.integers(0, 2, size=k).astype(float)
            prev = -np.inf
            while True:
                t = (s @ m > 0).astype(float)
                s = (m @ t > 0).astype(float)
                val = float(s @ m @ t)
                if val <= prev + 1e-15:
                    break
                prev = val
            best = max(best, prev)
    return best


def cut_distance(h1: StepGraphon, h2: StepGraphon, exact: bool | None = None) -> float:
    """Cut distance ``d(h1, h2)`` between two labeled step graphons.

    With ``exact=None`` the subset scan is used up to 20 refined blocks and the
    alternating heuristic (a lower bound, flagged by a warning) above that.
    ``exact=True`` refuses refinements the scan cannot handle.
    """
    widths, v1, v2 = common_refinement(h1, h2)
    k = widths.size
    weighted = np.outer(widths, widths) * (v1 - v2)
    if k <= EXACT_CUT_BLOCKS:
        return cut_norm_exact(weighted)
    if exact:
        raise ValueError(f"exact cut distance needs <= {EXACT_CUT_BLOCKS} refined blocks, got {k}")
    warnings.warn(f"cut distance over {k} blocks is a heuristic lower bound", stacklevel=2)
    return cut_norm_heuristic(weighted)


def permuted(h: StepGraphon, perm) -> StepGraphon:
    perm = np.asarray(perm)
    return StepGraphon(h.widths[perm], h.values[np.ix_(perm, perm)])


def delta_cut_upper(h1: StepGraphon, h2: StepGraphon) -> float:
    """Upper bound on the quotient distance: best cut distance over block relabelings.

    Only for two equal-width graphons with the same block count ``k <= 8``.
    """
    if h1.k != h2.k or h1.k > 8:
        raise ValueError("need the same block count, at most 8")
    w1 = np.asarray(h1.widths, dtype=float)
    w2 = np.asarray(h2.widths, dtype=float)
    if not (np.allclose(w1, w1[0], atol=1e-12) and np.allclose(w2, w1[0], atol=1e-12)):
        raise ValueError("block relabeling bound needs equal-width blocks")
    w = w1
    v1 = np.asarray(h1.values, dtype=float)
    v2 = np.asarray(h2.values, dtype=float)
    ww = np.outer(w, w)
    return min(
        cut_norm_exact(ww * (v1 - v2[np.ix_(p, p)]))
        for p in itertools.permutations(range(h1.k))
    )


@dataclass(frozen=True)
class Scallop:
    """Minimal-triangle graphon for edge density ``1/2 + eps`` and its parameters."""

    eps: float
    c: float
    p: float
    graphon: StepGraphon


def scallop_parameters(eps: float) -> tuple[float, float]:
    """``(c, p)`` with ``c = (2 + sqrt(1 - 6 eps)) / 6`` and ``p = 4c(1-2c)/(1-c)^2``."""
    if not 0 < eps < 1 / 6:
        raise ValueError("eps must lie strictly inside (0, 1/6)")
    c = (2 + math.sqrt(1 - 6 * eps)) / 6
    p = 4 * c * (1 - 2 * c) / (1 - c) ** 2
    return c, p


def _rational_sqrt(q: Fraction) -> Fraction | None:
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    return Fraction(a, b) if a * a == q.numerator and b * b == q.denominator else None


def scallop_parameters_exact(eps) -> tuple[Fraction, Fraction]:
    """Rational ``(c, p)`` for rational ``eps`` with ``1 - 6 eps`` a rational square."""
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 6):
        raise ValueError("eps must lie strictly inside (0, 1/6)")
    r = _rational_sqrt(1 - 6 * eps)
    if r is None:
        raise ValueError(f"1 - 6*eps = {1 - 6 * eps} is not a rational square")
    c = (2 + r) / 6
    return c, 4 * c * (1 - 2 * c) / (1 - c) ** 2


def scallop_graphon(eps: float) -> Scallop:
    """Three-block graphon: A=[0,c) joined fully to the rest, B-C joined with density p."""
    c, p = scallop_parameters(eps)
    half = (1 - c) / 2
    values = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, p], [1.0, p, 0.0]])
    return Scallop(eps, c, p, StepGraphon(np.array([c, half, 1 - c - half]), values))


def scallop_triangle_density(eps: float) -> float:
    """Closed form ``6 c^2 (1 - 2c)`` of the homomorphism triangle density of the scallop graphon."""
    c, _ = scallop_parameters(eps)
    return 6 * c * c * (1 - 2 * c)


def scallop_triangle_unordered(eps: float) -> float:
    """The same quantity counted per unordered triangle: one sixth of the homomorphism value."""
    r = math.sqrt(1 - 6 * eps)
    return (2 + r) ** 2 / 36 * (1 - r) / 3


def read_graphon(path: str | Path) -> StepGraphon:
    """Read the text format: ``k``, then k widths, then k rows of k values."""
    tokens = Path(path).read_text().split()
    k = int(tokens[0])
    nums = [float(t) for t in tokens[1:]]
    if len(nums) != k + k * k:
        raise ValueError(f"{path}: expected {k + k * k} numbers after k, got {len(nums)}")
    return StepGraphon(np.array(nums[:k]), np.array(nums[k:]).reshape(k, k))


def format_graphon(h: StepGraphon) -> str:
    fmt = lambda x: f"{float(x):.17g}"
    lines = [str(h.k), " ".join(fmt(x) for x in h.widths)]
    lines += [" ".join(fmt(x) for x in row) for row in h.values]
    return "\n".join(lines) + "\n"


def write_graphon(h: StepGraphon, path: str | Path) -> None:
    Path(path).write_text(format_graphon(h))
