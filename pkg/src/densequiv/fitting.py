"""Lagrange multipliers of the finite-n canonical ensemble.

``fit_theta`` maximises the concave dual ``theta . T* - psi_n(theta)`` with a
damped Newton iteration whose Hessian is ``n^2`` times the covariance of the
density vector under the canonical law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import Degenerate, HullBoundary, InfeasibleConstraint, NoConvergence
from .exact import (
    StatTable,
    canonical_mean,
    enumerate_graphs,
    er_moments,
    key_face,
    micro_count,
    partition_log,
    uniform_means,
)

MAX_STEP = 2.0
MAX_COND = 1e12


@dataclass
class FitResult:
    theta: np.ndarray
    iterations: int
    residual: float


def _newton(densities, log_counts, n2, target, tol, max_iter, theta0=None):
    """Newton ascent on ``phi . target - log Z(phi) / n2`` over the given buckets."""
    k, m = densities.shape
    theta = np.zeros(m) if theta0 is None else np.array(theta0, dtype=float)

    def state(th):
        lw = log_counts + n2 * (densities @ th)
        lz = logsumexp(lw)
        p = np.exp(lw - lz)
        mean = p @ densities
        return lz, p, mean

    lz, p, mean = state(theta)
    for it in range(max_iter + 1):
        grad = target - mean
        res = float(np.abs(grad).max())
        if res <= tol:
            return FitResult(theta, it, res)
        if it == max_iter:
            break
        d = densities - mean
        hess = n2 * ((d * p[:, None]).T @ d)
        evals = np.linalg.eigvalsh(hess)
        if evals[-1] <= 0:
            # law sits on a single bucket: no curvature, climb the gradient
            step = grad.copy()
        else:
            lam = 0.0
            if evals[0] <= evals[-1] / MAX_COND:
                lam = evals[-1] / MAX_COND - min(evals[0], 0.0)
            step = np.linalg.solve(hess + lam * np.eye(m), grad)
        norm = float(np.linalg.norm(step))
        if norm > MAX_STEP:
            step *= MAX_STEP / norm
        dual = theta @ target - lz / n2
        slope = float(grad @ step)
        t = 1.0
        for _ in range(60):
            cand = theta + t * step
            lz_c, p_c, mean_c = state(cand)
            dual_c = cand @ target - lz_c / n2
            res_c = float(np.abs(target - mean_c).max())
            if dual_c >= dual + 1e-4 * t * slope:
                break
            # near the optimum the dual is flat to rounding; accept residual progress there
            if res_c < res and dual_c >= dual - 1e-15 * (1 + abs(dual)):
                break
            t *= 0.5
        theta, lz, p, mean = cand, lz_c, p_c, mean_c
    raise NoConvergence(f"no convergence after {max_iter} Newton steps (residual {res:.3g})")


def _affine_rank(points: np.ndarray, tol: float = 1e-12) -> int:
    d = points - points.mean(axis=0)
    if d.shape[0] < 2:
        return 0
    s = np.linalg.svd(d, compute_uv=False)
    return int((s > tol * max(1.0, s[0])).sum())


def fit_theta(table: StatTable, target, tol: float = 1e-10, max_iter: int = 200) -> np.ndarray:
    """Multiplier with ``canonical_mean(theta) == target`` to sup-norm ``tol``.

    The target must lie strictly inside the hull of achievable density vectors.
    """
    return fit_theta_detailed(table, target, tol, max_iter).theta


def fit_theta_detailed(table: StatTable, target, tol: float = 1e-10, max_iter: int = 200) -> FitResult:
    target = np.asarray(target, dtype=float).reshape(table.m)
    t = table.densities
    if _affine_rank(t) < table.m:
        raise Degenerate("the statistics are affinely dependent on the support")
    try:
        face = key_face(table, target)
    except InfeasibleConstraint as exc:
        raise HullBoundary("target lies outside the achievable hull") from exc
    if not face.is_full:
        raise HullBoundary("target lies on the boundary of the achievable hull")
    return _newton(t, table.log_counts, table.n**2, target, tol, max_iter)


@dataclass
class FaceFit:
    """Canonical limit on the minimal face containing a target.

    ``theta`` is the finite part of the multiplier; along each vector of
    ``normals`` the true multiplier diverges to ``-infinity``. ``basis`` spans
    the directions along the face (zero columns when the face is a point).
    """

    theta: np.ndarray
    face_mask: np.ndarray
    normals: tuple[np.ndarray, ...]
    basis: np.ndarray
    iterations: int = 0
    residual: float = 0.0

    @property
    def divergent(self) -> bool:
        return bool(self.normals)

    def theta_signs(self) -> list[float]:
        """Multiplier with divergent coordinates replaced by +-inf."""
        out = [float(x) for x in self.theta]
        for a in self.normals:
            for k, ak in enumerate(a):
                if abs(ak) > 1e-9 and math.isfinite(out[k]):
                    out[k] = -math.copysign(math.inf, ak)
        return out


def fit_on_face(table: StatTable, target, tol: float = 1e-10, max_iter: int = 200) -> FaceFit:
    """Fit the canonical ensemble on the minimal hull face containing ``target``.

    For interior targets this is :func:`fit_theta`. For boundary targets the
    canonical law concentrates on the face (the multiplier diverges along the
    face normals) and the remaining finite multiplier is fitted within it.
    """
    target = np.asarray(target, dtype=float).reshape(table.m)
    face = key_face(table, target)
    t = table.densities[face.mask]
    d = t - target
    if d.shape[0] > 1:
        u, s, vt = np.linalg.svd(d, full_matrices=False)
        r = int((s > 1e-12 * max(1.0, s[0])).sum())
        basis = vt[:r].T
    else:
        basis = np.zeros((table.m, 0))
    if basis.shape[1] == 0:
        return FaceFit(np.zeros(table.m), face.mask, face.normals, basis)
    y = d @ basis
    fit = _newton(y, table.log_counts[face.mask], table.n**2, np.zeros(basis.shape[1]), tol, max_iter)
    return FaceFit(basis @ fit.theta, face.mask, face.normals, basis, fit.iterations, fit.residual)


def face_mean(table: StatTable, fit: FaceFit) -> np.ndarray:
    t = table.densities[fit.face_mask]
    lw = table.log_counts[fit.face_mask] + table.n**2 * (t @ fit.theta)
    return np.exp(lw - logsumexp(lw)) @ t


@dataclass
class EntropyResult:
    key: tuple[int, ...]
    omega: int
    theta: list[float]
    S_n: float
    s_n: float
    psi_n: float
    on_boundary: bool
    fit: FaceFit = field(repr=False, default=None)


def relative_entropy(table: StatTable, key, fit: FaceFit | None = None, tol: float = 1e-10) -> EntropyResult:
    """Relative entropy ``S_n`` of the microcanonical from the canonical ensemble.

    ``S_n = log(P_mic(G*) / P_can(G*))`` for any graph ``G*`` with statistics
    ``key``. Written as ``log1p(sum_{other keys} .../Omega)`` so it is
    non-negative by construction, and exactly 0 when the canonical law sits on
    the key alone.
    """
    key = tuple(int(k) for k in key)
    omega = micro_count(table, key)
    if omega == 0:
        raise InfeasibleConstraint(f"no graph on {table.n} vertices has statistics {key}")
    target = table.key_density(key)
    if fit is None:
        fit = fit_on_face(table, target, tol=tol)
    n2 = table.n**2
    mask = fit.face_mask.copy()
    idx = table.index_of(key)
    if not mask[idx]:
        raise ValueError("supplied fit does not cover the key")
    t = table.densities
    lw = table.log_counts + n2 * ((t - target) @ fit.theta)
    others = mask.copy()
    others[idx] = False
    if others.any():
        log_rest = logsumexp(lw[others])
        S = float(np.log1p(np.exp(log_rest - math.log(omega))))
    else:
        S = 0.0
    if fit.divergent:
        psi = float(logsumexp(lw[mask]) + n2 * (target @ fit.theta)) / n2
    else:
        psi = partition_log(table, fit.theta)
    return EntropyResult(key, omega, fit.theta_signs(), S, S / n2, psi, fit.divergent, fit)


# --- sign checks ---------------------------------------------------------------------


ASYMPTOTIC_THRESHOLDS = {"edge": 0.5, "triangle": 0.125}


@dataclass
class SignReport:
    theta: np.ndarray
    target: np.ndarray
    exact_thresholds: np.ndarray
    asymptotic_thresholds: list[float | None]
    theta_signs: list[int]
    expected_signs: list[int]

    @property
    def consistent(self) -> bool:
        return self.theta_signs == self.expected_signs


def _sign(x: float, tol: float) -> int:
    return 0 if abs(x) <= tol else (1 if x > 0 else -1)


def sign_check(table: StatTable, target, tol: float = 1e-10, zero_tol: float = 1e-8) -> SignReport:
    """Compare ``sign(theta_k*)`` with ``sign(T_k* - uniform mean_k)``.

    The finite-n thresholds are the exact uniform means; the asymptotic ones
    (1/2 for edges, 1/8 for triangles) are reported alongside.
    """
    target = np.asarray(target, dtype=float).reshape(table.m)
    theta = fit_theta(table, target, tol=tol)
    base = canonical_mean(table, np.zeros(table.m))
    return SignReport(
        theta,
        target,
        base,
        [ASYMPTOTIC_THRESHOLDS.get(f.kind) for f in table.families],
        [_sign(x, zero_tol) for x in theta],
        [_sign(x, 1e-13) for x in target - base],
    )


@dataclass
class TrajectoryEntry:
    n: int
    target: np.ndarray
    theta: np.ndarray | None
    error: str | None = None
    prediction: list[float] | None = None


def theta_trajectory(families, target_rule, ns=range(4, 9), tol: float = 1e-10, tables=None) -> list[TrajectoryEntry]:
    """Fitted multipliers ``theta*_n`` for a per-n target rule.

    ``target_rule`` maps ``n`` to a density vector; the helpers
    :func:`er_rule` and :func:`uniform_rule` build the common ones and carry a
    ``limit`` attribute, from which the large-n multiplier is predicted and
    attached to every entry. Errors are recorded per entry rather than raised.
    """
    from .variational import limiting_multiplier

    families = tuple(families)
    limit = getattr(target_rule, "limit", None)
    prediction = None if limit is None else limiting_multiplier(families, limit)
    out = []
    for n in ns:
        table = tables[n] if tables and n in tables else enumerate_graphs(n, families)
        target = np.asarray(target_rule(n), dtype=float)
        try:
            theta = fit_theta(table, target, tol=tol)
            out.append(TrajectoryEntry(n, target, theta, prediction=prediction))
        except Exception as exc:  # noqa: BLE001 - reported per entry
            out.append(TrajectoryEntry(n, target, None, f"{type(exc).__name__}: {exc}", prediction))
    return out


class _Rule:
    def __init__(self, fn, limit):
        self.fn = fn
        self.limit = limit

    def __call__(self, n):
        return self.fn(n)


def er_rule(families, p: float):
    """Exact Erdos-Renyi(p) moments at each n; the limit is ``p^(edges)``."""
    families = tuple(families)
    return _Rule(lambda n: er_moments(n, families, p), [p**f.edges for f in families])


def uniform_rule(families):
    families = tuple(families)
    return _Rule(lambda n: uniform_means(n, families), [0.5**f.edges for f in families])
