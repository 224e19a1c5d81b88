"""Metropolis edge-flip sampler for the canonical ensemble.

The graph is held as rows of 64-bit words so that common-neighbour counts are
popcounts, which keeps a step ``O(n / 64)`` for triangles and ``O(1)`` for
edges and stars. Random numbers come from a numpy ``Generator`` seeded with
``seed + chain_index`` and are drawn in blocks, so a chain is reproducible
bit for bit regardless of how chains are scheduled on threads.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .exact import _family_code
from .graphs import LabeledGraph, SubgraphFamily
from .variational import _objective, invert_constraint

BATCHES = 32
BLOCK = 1 << 18


@dataclass(frozen=True)
class SamplerConfig:
    n: int
    families: tuple[SubgraphFamily, ...]
    theta: tuple[float, ...]
    steps: int
    burnin: int = 0
    thin: int = 1
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "theta", tuple(float(x) for x in np.atleast_1d(self.theta)))
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if len(self.theta) != len(self.families):
            raise ValueError("one theta per family")
        if not all(math.isfinite(x) for x in self.theta):
            raise ValueError("theta must be finite")
        if self.steps < 1 or not 0 <= self.burnin < self.steps:
            raise ValueError("need 0 <= burnin < steps")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")
        if (self.steps - self.burnin) // self.thin < BATCHES:
            raise ValueError(f"need at least {BATCHES} recorded samples for batch means")


@dataclass
class TraceSummary:
    families: tuple[SubgraphFamily, ...]
    means: np.ndarray
    se: np.ndarray
    acceptance: float
    ess: np.ndarray
    records: int
    chain_means: np.ndarray = field(repr=False)
    traces: list[np.ndarray] | None = field(default=None, repr=False)
    raw: list[np.ndarray] | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "families": [f.name for f in self.families],
            "means": [float(x) for x in self.means],
            "se": [float(x) for x in self.se],
            "acceptance": float(self.acceptance),
            "ess": [float(x) for x in self.ess],
            "records": int(self.records),
        }


_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


@numba.njit(cache=True, nogil=True)
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & _M1)
    x = (x & _M2) + ((x >> np.uint64(2)) & _M2)
    x = (x + (x >> np.uint64(4))) & _M4
    return int((x * _H01) >> np.uint64(56))


@numba.njit(cache=True, nogil=True)
def _common(rows, i, j):
    c = 0
    for w in range(rows.shape[1]):
        c += _popcount64(rows[i, w] & rows[j, w])
    return c


@numba.njit(cache=True, nogil=True)
def _raw_stats(n, rows, deg, n_edges, n_tri, kinds, exps, out):
    for k in range(kinds.shape[0]):
        if kinds[k] == 0:
            out[k] = n_edges
        elif kinds[k] == 1:
            out[k] = n_tri
        else:
            s = 0.0
            for v in range(n):
                s += float(deg[v]) ** exps[k]
            out[k] = s


@numba.njit(cache=True, nogil=True)
def _run_block(n, rows, deg, state, kinds, exps, coef, pi, pj, logu, step0, burnin, thin, trace, rec0):
    """Advance the chain by ``len(pi)`` proposals; returns (accepted, records written)."""
    m = kinds.shape[0]
    acc = 0
    rec = rec0
    buf = np.empty(m)
    for s in range(pi.shape[0]):
        i = pi[s]
        j = pj[s]
        wi = j >> 6
        bi = np.uint64(1) << np.uint64(j & 63)
        present = (rows[i, wi] & bi) != 0
        sign = -1.0 if present else 1.0
        common = -1
        dh = 0.0
        for k in range(m):
            if kinds[k] == 0:
                d = 2.0 * sign
            elif kinds[k] == 1:
                if common < 0:
                    common = _common(rows, i, j)
                d = 6.0 * sign * common
            else:
                e = exps[k]
                di = float(deg[i])
                dj = float(deg[j])
                d = (di + sign) ** e - di**e + (dj + sign) ** e - dj**e
            dh += coef[k] * d
        if logu[s] < dh:
            acc += 1
            rows[i, wi] ^= bi
            rows[j, i >> 6] ^= np.uint64(1) << np.uint64(i & 63)
            step = 1 if sign > 0 else -1
            deg[i] += step
            deg[j] += step
            state[0] += step
            for k in range(m):
                if kinds[k] == 1:
                    if common < 0:
                        common = _common(rows, i, j)
                    state[1] += step * common
                    break
        t = step0 + s + 1
        if t > burnin and (t - burnin) % thin == 0:
            _raw_stats(n, rows, deg, state[0], state[1], kinds, exps, buf)
            for k in range(m):
                trace[rec, k] = buf[k]
            rec += 1
    return acc, rec - rec0


def adjacency_matrix(n: int, edges) -> np.ndarray:
    """Boolean adjacency matrix from an edge list, any ``n``."""
    a = np.zeros((n, n), dtype=bool)
    for i, j in edges:
        if i == j or not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"bad edge ({i}, {j})")
        a[i, j] = a[j, i] = True
    return a


def _as_matrix(initial, n: int) -> np.ndarray:
    if isinstance(initial, LabeledGraph):
        a = np.array(initial.to_matrix(), dtype=bool)
    else:
        a = np.asarray(initial).astype(bool)
    if a.shape != (n, n):
        raise ValueError("initial graph has the wrong number of vertices")
    if not (a == a.T).all() or a.diagonal().any():
        raise ValueError("initial adjacency must be symmetric with zero diagonal")
    return a


def _rows_of(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    words = (n + 63) // 64
    padded = np.zeros((n, words * 64), dtype=bool)
    padded[:, :n] = a
    bits = np.packbits(padded, axis=1, bitorder="little")
    return bits.view("<u8").astype(np.uint64).reshape(n, words)


def _random_graph(n: int, rng: np.random.Generator) -> np.ndarray:
    upper = np.triu(rng.random((n, n)) < 0.5, 1)
    return upper | upper.T


def _raw_to_density(fams, n, raw):
    out = np.empty_like(raw)
    for k, f in enumerate(fams):
        hom = raw[:, k] * (2 if f.kind == "edge" else 6 if f.kind == "triangle" else 1)
        out[:, k] = hom / float(n) ** f.vertices
    return out


def _chain(cfg: SamplerConfig, index: int, initial):
    rng = np.random.default_rng(cfg.seed + index)
    a = _as_matrix(initial, cfg.n) if initial is not None else _random_graph(cfg.n, rng)
    rows = _rows_of(a)
    ai = a.astype(np.int64)
    deg = ai.sum(axis=1)
    state = np.array([deg.sum() // 2, int(np.trace(ai @ ai @ ai)) // 6], dtype=np.int64)
    codes = [_family_code(f) for f in cfg.families]
    kinds = np.array([c[0] for c in codes], dtype=np.int64)
    exps = np.array([f.star_exponent if f.kind in ("star", "wedge") else 1 for f in cfg.families], dtype=np.int64)
    n2 = float(cfg.n) ** 2
    coef = np.array([th * n2 / float(cfg.n) ** f.vertices for th, f in zip(cfg.theta, cfg.families)])
    n_rec = (cfg.steps - cfg.burnin) // cfg.thin
    trace = np.empty((n_rec, len(cfg.families)))
    acc = 0
    rec = 0
    done = 0
    while done < cfg.steps:
        b = min(BLOCK, cfg.steps - done)
        pi = rng.integers(0, cfg.n, size=b)
        pj = rng.integers(0, cfg.n - 1, size=b)
        pj = pj + (pj >= pi)
        logu = np.log(rng.random(b))
        a, r = _run_block(cfg.n, rows, deg, state, kinds, exps, coef, pi, pj, logu, done, cfg.burnin, cfg.thin, trace, rec)
        acc += a
        rec += r
        done += b
    return trace[:rec], acc


def batch_means_se(x: np.ndarray, batches: int = BATCHES) -> np.ndarray:
    """Batch-means standard error of the column means of ``x``."""
    size = x.shape[0] // batches
    if size < 1:
        raise ValueError("not enough samples for batch means")
    bm = x[: size * batches].reshape(batches, size, -1).mean(axis=1)
    return bm.std(axis=0, ddof=1) / math.sqrt(batches)


def run_chain(
    cfg: SamplerConfig,
    initial=None,
    threads: int | None = None,
    keep_trace: bool = False,
) -> TraceSummary:
    """Run ``cfg.chains`` independent chains and merge their summaries.

    Each chain starts from ``initial`` (a :class:`LabeledGraph` or a 0/1
    adjacency matrix) if given, otherwise from a uniform random graph drawn with its own generator. Means are averaged over
    chains; the standard error combines the per-chain batch-means errors.
    """
    workers = max(1, min(threads or 1, cfg.chains))
    with ThreadPoolExecutor(workers) as ex:
        results = list(ex.map(lambda c: _chain(cfg, c, initial), range(cfg.chains)))
    raws = [r for r, _ in results]
    dens = [_raw_to_density(cfg.families, cfg.n, r) for r in raws]
    chain_means = np.array([d.mean(axis=0) for d in dens])
    chain_se = np.array([batch_means_se(d) for d in dens])
    means = chain_means.mean(axis=0)
    se = np.sqrt((chain_se**2).sum(axis=0)) / cfg.chains
    records = sum(d.shape[0] for d in dens)
    var = np.concatenate(dens).var(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ess = np.where(se > 0, var / se**2, float(records))
    acceptance = sum(a for _, a in results) / (cfg.steps * cfg.chains)
    return TraceSummary(
        cfg.families,
        means,
        se,
        acceptance,
        ess,
        records,
        chain_means,
        dens if keep_trace else None,
        raws if keep_trace else None,
    )


def local_maxima(theta, exponents, points: int = 20_000) -> int:
    """Number of local maxima of ``sum theta_k u^E_k - I(u)`` on a grid over (0, 1)."""
    _, df = _objective(list(theta), list(exponents))
    u = np.linspace(1e-9, 1 - 1e-9, points)
    d = df(u)
    return int(np.sum((d[:-1] > 0) & (d[1:] <= 0)))


@dataclass
class AveragingReport:
    family: SubgraphFamily
    target: float
    theta: float
    u_star: float
    predicted: float
    adjusted: float | None
    summary: TraceSummary
    error: float
    adjusted_error: float | None
    warning: str | None = None

    def as_dict(self) -> dict:
        out = {
            "family": self.family.name,
            "target": self.target,
            "theta": self.theta,
            "u_star": self.u_star,
            "predicted": self.predicted,
            "observed": float(self.summary.means[0]),
            "se": float(self.summary.se[0]),
            "error": self.error,
            "warning": self.warning,
        }
        if self.adjusted is not None:
            out["predicted_finite_n"] = self.adjusted
            out["error_finite_n"] = self.adjusted_error
        return out


def averaging_check(
    n: int,
    family: SubgraphFamily,
    target: float,
    steps: int = 2_000_000,
    burnin: int | None = None,
    thin: int = 100,
    seed: int = 0,
    chains: int = 1,
    threads: int | None = None,
) -> AveragingReport:
    """Sample at the limiting multiplier for ``target`` and compare with ``u*^E``.

    For the edge model the exact finite-n mean ``u* (n - 1) / n`` is reported
    as well. A warning is attached when the scalar problem has more than one
    local maximum, where single-flip dynamics can be trapped.
    """
    kind = "star" if family.kind in ("star", "wedge") else family.kind
    j = family.star_exponent if kind == "star" else None
    inv = invert_constraint(kind, target, j=j)
    e = family.edges
    predicted = inv.u_star**e
    cfg = SamplerConfig(n, (family,), (inv.theta,), steps, steps // 5 if burnin is None else burnin, thin, seed, chains)
    summary = run_chain(cfg, threads=threads)
    obs = float(summary.means[0])
    adjusted = predicted * (n - 1) / n if family.kind == "edge" else None
    warning = None
    if local_maxima([inv.theta], [e]) > 1:
        warning = "several local maxima: single-flip dynamics may not reach the global one"
        warnings.warn(warning, stacklevel=2)
    return AveragingReport(
        family,
        float(target),
        float(inv.theta),
        float(inv.u_star),
        float(predicted),
        adjusted,
        summary,
        abs(obs - predicted),
        None if adjusted is None else abs(obs - adjusted),
        warning,
    )
