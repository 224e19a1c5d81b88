"""Large-n layer: scalar variational problems and the limiting relative entropy.

``s_inf`` is the difference of two suprema of ``theta . T(h) - I(h)``: over all
graphons and over those meeting the hard constraint. For the cases where both
suprema are known in closed form they are evaluated explicitly; for the
broken cases only a qualitative verdict (or a lower bound from a supplied
limiting multiplier) is returned.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .errors import InfeasibleConstraint, OutOfRegime
from .graphon import StepGraphon, densities, rate_derivative, rate_functional, rate_scalar, scallop_graphon
from .graphs import SubgraphFamily

GRID_POINTS = 10_000
TIE_TOL = 1e-9
MERGE_TOL = 1e-6
ZERO_TOL = 1e-9


@dataclass
class ScalarSolution:
    """Global maximisers of ``f(u) = sum theta_k u**E_k - I(u)`` on [0, 1]."""

    maximizers: list[float]
    value: float
    unique: bool
    hypothesis_ok: bool = True


def _objective(theta, exps):
    def f(u):
        return sum(t * u**e for t, e in zip(theta, exps)) - rate_scalar(u)

    def df(u):
        return sum(t * e * u ** (e - 1) for t, e in zip(theta, exps)) - rate_derivative(u)

    return f, df


def scalar_sup(theta, exponents) -> ScalarSolution:
    """Global sup of ``sum theta_k u**E_k - I(u)`` by grid scan plus root polishing.

    Every sign change of the derivative from + to - on a 10^4-point grid is
    refined with Brent's method; maximisers whose values agree within 1e-9 are
    all reported. ``hypothesis_ok`` is False when a coefficient of a term with
    exponent > 1 is negative, where the reduction from graphons to constants is
    not guaranteed.
    """
    theta = [float(t) for t in np.atleast_1d(theta)]
    exps = [int(e) for e in np.atleast_1d(exponents)]
    if len(theta) != len(exps) or any(e < 1 for e in exps):
        raise ValueError("need one positive integer exponent per coefficient")
    f, df = _objective(theta, exps)
    grid = np.linspace(0.0, 1.0, GRID_POINTS + 1)[1:-1]
    deriv = df(grid)
    lo_edge, hi_edge = 1e-300, 1.0 - 1e-16
    pts = np.concatenate([[lo_edge], grid, [hi_edge]])
    dv = np.concatenate([[df(lo_edge)], deriv, [df(hi_edge)]])
    cands = []
    for i in np.nonzero((dv[:-1] > 0) & (dv[1:] <= 0))[0]:
        a, b = pts[i], pts[i + 1]
        u = b if dv[i + 1] == 0 else brentq(df, a, b, xtol=1e-15, rtol=1e-15, maxiter=200)
        cands.append((float(f(u)), float(u)))
    if not cands:
        # derivative never changes sign: boundary maximum
        cands = [(float(f(0.0)), 0.0), (float(f(1.0)), 1.0)]
    best = max(v for v, _ in cands)
    tops = sorted(u for v, u in cands if v >= best - TIE_TOL)
    merged = [tops[0]]
    for u in tops[1:]:
        if u - merged[-1] > MERGE_TOL:
            merged.append(u)
    hyp = all(t >= 0 for t, e in zip(theta, exps) if e > 1)
    return ScalarSolution(merged, best, len(merged) == 1, hyp)


@dataclass
class Inversion:
    theta: float
    u_star: float
    solution: ScalarSolution


def invert_constraint(kind: str, target: float, j: int | None = None) -> Inversion:
    """Limiting multiplier whose unique scalar maximiser reproduces ``target``.

    ``kind`` is ``"edge"``, ``"triangle"`` or ``"star"`` (with ``j`` leaves);
    the wedge is ``star`` with ``j=2``. Raises :class:`OutOfRegime` when the
    target is outside the range where a unique global maximiser is known, or
    when the scalar problem does not confirm it.
    """
    if kind == "edge":
        e = 1
        if not 0 < target < 1:
            raise OutOfRegime("edge target must lie in (0, 1)")
    elif kind == "triangle":
        e = 3
        if not 0.125 <= target < 1:
            raise OutOfRegime("triangle inversion needs 1/8 <= T2* < 1")
    elif kind in ("star", "wedge"):
        e = 2 if kind == "wedge" else int(j)
        if e < 2:
            raise ValueError("star needs j >= 2")
        if not 0 < target < 1:
            raise OutOfRegime("star target must lie in (0, 1)")
    else:
        raise ValueError(f"unknown model {kind!r}")
    u = target ** (1.0 / e)
    theta = rate_derivative(u) / (e * u ** (e - 1))
    sol = scalar_sup([theta], [e])
    if not sol.unique or abs(sol.maximizers[0] - u) > 1e-7:
        raise OutOfRegime(f"u* = {u:.6g} is not the unique global maximiser at theta = {theta:.6g}")
    return Inversion(theta, u, sol)


@dataclass
class SInfVerdict:
    """Outcome for the limiting specific relative entropy.

    ``kind`` is ``Zero``, ``PositiveLowerBound``, ``PositiveQualitative`` or
    ``Unknown``; ``terms`` holds whichever of the two suprema were evaluated.
    """

    kind: str
    case: str
    value: float | None = None
    theta_inf: list[float] | None = None
    u_star: float | None = None
    terms: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind == "PositiveLowerBound" and not (self.value and self.value > 0):
            raise ValueError("a positive lower bound must be > 0")


def _zero_from_terms(case, sup_all, sup_con, theta, u, notes=()):
    diff = sup_all - sup_con
    terms = {"sup_all": sup_all, "sup_constrained": sup_con, "difference": diff}
    if abs(diff) > ZERO_TOL:
        return SInfVerdict("Unknown", case, None, theta, u, terms, [f"suprema differ by {diff:.3g}", *notes])
    return SInfVerdict("Zero", case, 0.0, theta, u, terms, list(notes))


def s_inf_single(kind: str, target: float, j: int | None = None) -> SInfVerdict:
    """Single-family models: edge, triangle, or j-star."""
    if kind == "triangle":
        if not 0 <= target <= 1:
            raise InfeasibleConstraint("triangle density must lie in [0, 1]")
        if target == 0:
            return SInfVerdict("Zero", "I(b)", 0.0, notes=["canonical and microcanonical laws coincide"])
        if target == 1:
            return SInfVerdict("Zero", "I(a)", 0.0, notes=["degenerate: only the complete graph"])
        if target < 0.125:
            return SInfVerdict("Unknown", "I", notes=["0 < T2* < 1/8 is not covered"])
        inv = invert_constraint("triangle", target)
        sup_con = inv.theta * target - rate_scalar(target ** (1 / 3))
        return _zero_from_terms("I(a)", inv.solution.value, sup_con, [inv.theta], inv.u_star)
    if kind in ("star", "wedge"):
        e = 2 if kind == "wedge" else int(j)
        if not 0 <= target <= 1:
            raise InfeasibleConstraint("star density must lie in [0, 1]")
        if target in (0.0, 1.0):
            return SInfVerdict("Zero", "III", 0.0, notes=["degenerate: empty or complete graph"])
        inv = invert_constraint("star", target, j=e)
        sup_con = inv.theta * target - rate_scalar(inv.u_star)
        return _zero_from_terms("III", inv.solution.value, sup_con, [inv.theta], inv.u_star)
    if kind == "edge":
        if not 0 <= target <= 1:
            raise InfeasibleConstraint("edge density must lie in [0, 1]")
        if target in (0.0, 1.0):
            return SInfVerdict("Zero", "edge", 0.0, notes=["degenerate: empty or complete graph"])
        inv = invert_constraint("edge", target)
        sup_con = inv.theta * target - rate_scalar(target)
        return _zero_from_terms("edge", inv.solution.value, sup_con, [inv.theta], inv.u_star)
    raise ValueError(f"unknown model {kind!r}")


def broken_lower_bound(t1: float, t2: float, theta_inf) -> float | None:
    """Lower bound on ``s_inf`` from a limiting multiplier ``(theta1, theta2)``.

    Comparing the unconstrained supremum against constant graphons ``u = t1``
    and ``u = t2**(1/3)`` and using Jensen for the constrained infimum gives
    ``theta2 (t1^3 - t2)`` and ``theta1 (t2^(1/3) - t1) + I(t1) - I(t2^(1/3))``.
    Either entry of ``theta_inf`` may be None.
    """
    th1, th2 = theta_inf
    bounds = []
    if th2 is not None:
        bounds.append(th2 * (t1**3 - t2))
    if th1 is not None:
        r = t2 ** (1 / 3)
        bounds.append(th1 * (r - t1) + rate_scalar(t1) - rate_scalar(r))
    return max(bounds) if bounds else None


def s_inf_edge_triangle(t1: float, t2: float, theta_inf=None) -> SInfVerdict:
    """Edge-triangle model dispatched over the classification table."""
    from .phase import classify

    pt = classify(t1, t2)
    case = pt.case
    if pt.verdict == "Infeasible":
        raise InfeasibleConstraint(f"({t1}, {t2}) is not an achievable edge-triangle pair")
    if case == "II(a)":
        inv = invert_constraint("edge", t1)
        sol = scalar_sup([inv.theta, 0.0], [1, 3])
        sup_con = inv.theta * t1 - rate_scalar(t1)
        return _zero_from_terms("II(a)", sol.value, sup_con, [inv.theta, 0.0], t1)
    if case == "II(e)":
        return SInfVerdict("Zero", "II(e)", 0.0, notes=["canonical law supported on triangle-free graphs"])
    if case in ("II(b)", "II(c)"):
        verdict = SInfVerdict("PositiveQualitative", case)
        if theta_inf is not None:
            lb = broken_lower_bound(t1, t2, theta_inf)
            verdict.theta_inf = [None if x is None else float(x) for x in theta_inf]
            verdict.terms["lower_bound"] = lb
            if lb is not None and lb > 0:
                verdict.kind = "PositiveLowerBound"
                verdict.value = lb
        return verdict
    if case == "II(d)":
        sc = scallop_graphon(t1 - 0.5)
        micro = rate_functional(sc.graphon)
        return SInfVerdict(
            "PositiveQualitative",
            "II(d)",
            terms={"c": sc.c, "p": sc.p, "constrained_rate": micro},
            notes=["constrained rate is (1-c)^2/2 * I(p) at the minimal-triangle graphon"],
        )
    return SInfVerdict("Unknown", case or "unknown")


def s_inf(model: str, *args, theta_inf=None, j: int | None = None) -> SInfVerdict:
    """Dispatch: ``s_inf("triangle", t2)``, ``s_inf("star", t, j=3)``,
    ``s_inf("edge", t1)``, ``s_inf("edge-triangle", t1, t2, theta_inf=...)``."""
    if model == "edge-triangle":
        return s_inf_edge_triangle(*args, theta_inf=theta_inf)
    return s_inf_single(model, *args, j=j)


def limiting_multiplier(families, target) -> list[float] | None:
    """Predicted ``theta_inf`` for a limiting target, or None when not determined.

    Covers single-family models in their unique-maximiser regime and
    edge-triangle targets on ``t2 = t1^3``.
    """
    families = tuple(families)
    target = [float(x) for x in np.atleast_1d(target)]
    try:
        if len(families) == 1:
            f = families[0]
            v = s_inf_single(f.kind, target[0], j=f.j if f.kind == "star" else None)
        elif [f.kind for f in families] == ["edge", "triangle"]:
            v = s_inf_edge_triangle(*target)
        else:
            return None
    except (OutOfRegime, InfeasibleConstraint):
        return None
    return None if v.kind != "Zero" or v.theta_inf is None else [float(x) for x in v.theta_inf]


# --- constrained minimisation of the rate over step graphons ---------------------------


def _density_grads(fam: SubgraphFamily, w, h):
    if fam.kind == "edge":
        return w @ h @ w, 2 * h @ w, np.outer(w, w)
    if fam.kind == "triangle":
        dw = np.diag(w)
        hd = h @ dw
        m = dw @ h
        t = np.trace(m @ m @ m)
        gw = 3 * np.diag(hd @ hd @ h)
        gh = 3 * dw @ h @ dw @ h @ dw
        return t, gw, gh
    jj = fam.star_exponent
    d = h @ w
    t = w @ d**jj
    coef = jj * w * d ** (jj - 1)
    gw = d**jj + h @ coef
    gh = np.outer(coef, w)
    return t, gw, gh


class _Problem:
    def __init__(self, families, target, k, eps=1e-12):
        self.families = tuple(families)
        self.target = np.asarray(target, dtype=float)
        self.k = k
        self.iu = np.triu_indices(k)
        self.eps = eps
        self.bounds = [(-12.0, 12.0)] * k + [(eps, 1 - eps)] * len(self.iu[0])

    def unpack(self, x):
        k = self.k
        z = x[:k]
        e = np.exp(z - z.max())
        w = e / e.sum()
        h = np.zeros((k, k))
        h[self.iu] = x[k:]
        h = h + h.T - np.diag(np.diag(h))
        return w, h

    def _fold(self, g):
        full = g + g.T
        full[np.diag_indices(self.k)] = np.diag(g)
        return full[self.iu]

    def _chain(self, w, gw, gh):
        gz = w * (gw - w @ gw)
        return np.concatenate([gz, self._fold(gh)])

    def rate(self, x):
        w, h = self.unpack(x)
        r = rate_scalar(h)
        val = w @ r @ w
        g = self._chain(w, 2 * r @ w, np.outer(w, w) * rate_derivative(np.clip(h, 1e-300, 1 - 1e-16)))
        return float(val), g

    def constraints(self, x):
        w, h = self.unpack(x)
        vals, jac = [], []
        for fam in self.families:
            t, gw, gh = _density_grads(fam, w, h)
            vals.append(t)
            jac.append(self._chain(w, gw, gh))
        return np.array(vals) - self.target, np.array(jac)

    def penalty(self, x, mu):
        r, gr = self.rate(x)
        c, jc = self.constraints(x)
        return r + mu * (c @ c), gr + 2 * mu * (c @ jc)

    def graphon(self, x) -> StepGraphon:
        w, h = self.unpack(x)
        return StepGraphon(w / w.sum(), np.clip(h, 0.0, 1.0))


@dataclass
class MinRateResult:
    """Best constrained rate found: an upper bound on the infimum over the level set."""

    value: float
    graphon: StepGraphon
    violation: float
    restart: int
    feasible_restarts: int


def _one_restart(prob: _Problem, x0, feas_tol):
    x = x0
    for mu in (1e1, 1e2, 1e3, 1e4, 1e5, 1e6):
        res = minimize(prob.penalty, x, args=(mu,), jac=True, method="L-BFGS-B", bounds=prob.bounds,
                       options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-11})
        x = res.x
    cons = {"type": "eq", "fun": lambda y: prob.constraints(y)[0], "jac": lambda y: prob.constraints(y)[1]}
    with warnings.catch_warnings():
        # SLSQP clips trial steps to the box itself and says so
        warnings.filterwarnings("ignore", "Values in x were outside bounds", RuntimeWarning)
        res = minimize(prob.rate, x, jac=True, method="SLSQP", bounds=prob.bounds, constraints=[cons],
                       options={"maxiter": 500, "ftol": 1e-15})
    cand = res.x if np.all(np.isfinite(res.x)) else x
    best = None
    for y in (cand, x):
        viol = float(np.abs(prob.constraints(y)[0]).max())
        val = prob.rate(y)[0]
        if viol <= feas_tol and (best is None or val < best[0]):
            best = (val, y, viol)
    return best


def min_rate_on_levelset(families, target, blocks: int = 4, restarts: int = 16, seed: int = 0,
                         feas_tol: float = 1e-8, workers: int = 1) -> MinRateResult:
    """Minimise ``I(h)`` over ``blocks``-block step graphons with ``T(h) = target``.

    Quadratic-penalty continuation (L-BFGS-B) followed by an SLSQP polish on
    the equality constraints, from ``restarts`` random starts. The result is an
    upper bound on the true infimum; ties go to the lowest restart index.
    """
    families = tuple(families)
    target = np.atleast_1d(np.asarray(target, dtype=float))
    if target.size != len(families):
        raise ValueError("one target per family")
    prob = _Problem(families, target, blocks)
    rng = np.random.default_rng(seed)
    starts = []
    npar = len(prob.iu[0])
    for _ in range(restarts):
        z = rng.normal(scale=0.5, size=blocks)
        hv = rng.uniform(0.05, 0.95, size=npar)
        starts.append(np.concatenate([z, hv]))

    def run(i):
        return _one_restart(prob, starts[i], feas_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(restarts)))
    else:
        results = [run(i) for i in range(restarts)]
    feasible = [(r[0], i, r) for i, r in enumerate(results) if r is not None]
    if not feasible:
        raise InfeasibleConstraint("no restart reached the level set")
    val, idx, (v, x, viol) = min(feasible, key=lambda t: (t[0], t[1]))
    return MinRateResult(val, prob.graphon(x), viol, idx, len(feasible))


def jensen_bound(families, target) -> float | None:
    """``I(T1*)``: lower bound on the constrained rate when an edge density is fixed."""
    for f, t in zip(families, np.atleast_1d(target)):
        if f.kind == "edge":
            return rate_scalar(float(t))
    return None


def constant_candidate(families, target) -> float | None:
    """Rate of the constant graphon meeting all targets, if one exists."""
    fams = tuple(families)
    tgt = np.atleast_1d(np.asarray(target, dtype=float))
    f0 = fams[0]
    u = tgt[0] ** (1.0 / f0.edges)
    h = StepGraphon.constant(u)
    if np.allclose(densities(fams, h), tgt, atol=1e-12):
        return rate_scalar(u)
    return None

