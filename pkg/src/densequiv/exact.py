"""Exact enumeration of all labeled graphs on n <= 8 vertices, bucketed by statistics.

The canonical weight of a graph depends on it only through its homomorphism
densities, so every quantity of the two ensembles (partition function,
canonical means, microcanonical counts, relative entropy) is a sum over the
buckets of a :class:`StatTable`.

Raw statistics per family: edge -> number of edges, triangle -> number of
triangles, wedge / star(j) -> ``sum(deg**j)`` (the homomorphism count itself).
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit, types
from numba.typed import Dict
from scipy.optimize import linprog
from scipy.special import logsumexp

from .errors import InfeasibleConstraint
from .graphs import LabeledGraph, SubgraphFamily, hom_count

MAX_N = 8
DENSE_LIMIT = 1 << 25

KIND_EDGE, KIND_TRIANGLE, KIND_STAR = 0, 1, 2


def _family_code(f: SubgraphFamily) -> tuple[int, int]:
    if f.kind == "edge":
        return KIND_EDGE, 1
    if f.kind == "triangle":
        return KIND_TRIANGLE, 3
    return KIND_STAR, f.star_exponent


def raw_stat(f: SubgraphFamily, graph: LabeledGraph) -> int:
    """The integer statistic used as key coordinate for ``f``."""
    if f.kind == "edge":
        return graph.num_edges()
    if f.kind == "triangle":
        return graph.num_triangles()
    return hom_count(f, graph)


def raw_to_hom(f: SubgraphFamily, raw):
    if f.kind == "edge":
        return 2 * raw
    if f.kind == "triangle":
        return 6 * raw
    return raw


def stat_radix(f: SubgraphFamily, n: int) -> int:
    if f.kind == "edge":
        return math.comb(n, 2) + 1
    if f.kind == "triangle":
        return math.comb(n, 3) + 1
    return n * (n - 1) ** f.star_exponent + 1


@njit(cache=True)
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True)
def _ipow(b, e):
    r = 1
    for _ in range(e):
        r *= b
    return r


@njit(cache=True, nogil=True)
def _walk(n, pi, pj, kinds, exps, mults, start, stop, dense, sparse, use_dense):
    m = kinds.shape[0]
    adj = np.zeros(n, dtype=np.int64)
    deg = np.zeros(n, dtype=np.int64)
    stats = np.zeros(m, dtype=np.int64)
    g = start ^ (start >> 1)
    for b in range(pi.shape[0]):
        if (g >> b) & 1:
            i = pi[b]
            j = pj[b]
            adj[i] |= np.int64(1) << j
            adj[j] |= np.int64(1) << i
            deg[i] += 1
            deg[j] += 1
    for f in range(m):
        s = 0
        if kinds[f] == 0:
            for v in range(n):
                s += deg[v]
            s //= 2
        elif kinds[f] == 1:
            for b in range(pi.shape[0]):
                if (g >> b) & 1:
                    s += _popcount(adj[pi[b]] & adj[pj[b]])
            s //= 3
        else:
            for v in range(n):
                s += _ipow(deg[v], exps[f])
        stats[f] = s
    k = start
    while True:
        code = 0
        for f in range(m):
            code += stats[f] * mults[f]
        if use_dense:
            dense[code] += 1
        else:
            if code in sparse:
                sparse[code] += 1
            else:
                sparse[code] = 1
        k += 1
        if k >= stop:
            break
        b = 0
        t = k
        while (t & 1) == 0:
            t >>= 1
            b += 1
        i = pi[b]
        j = pj[b]
        present = (adj[i] >> j) & 1
        common = _popcount(adj[i] & adj[j])
        di = deg[i]
        dj = deg[j]
        sgn = -1 if present else 1
        for f in range(m):
            if kinds[f] == 0:
                stats[f] += sgn
            elif kinds[f] == 1:
                stats[f] += sgn * common
            else:
                e = exps[f]
                stats[f] += _ipow(di + sgn, e) - _ipow(di, e) + _ipow(dj + sgn, e) - _ipow(dj, e)
        adj[i] ^= np.int64(1) << j
        adj[j] ^= np.int64(1) << i
        deg[i] += sgn
        deg[j] += sgn


def _new_sparse():
    return Dict.empty(key_type=types.int64, value_type=types.int64)


@dataclass(frozen=True, eq=False)
class StatTable:
    """Counts of labeled graphs on ``n`` vertices per integer statistic vector.

    ``keys`` is a ``(K, m)`` int64 array sorted lexicographically, ``counts`` the
    matching graph counts.
    """

    n: int
    families: tuple[SubgraphFamily, ...]
    keys: np.ndarray
    counts: np.ndarray

    @property
    def m(self) -> int:
        return len(self.families)

    @property
    def total(self) -> int:
        return int(sum(int(c) for c in self.counts))

    @property
    def densities(self) -> np.ndarray:
        """``(K, m)`` homomorphism densities of every key."""
        out = np.empty(self.keys.shape, dtype=float)
        for col, f in enumerate(self.families):
            hom = raw_to_hom(f, self.keys[:, col].astype(float))
            out[:, col] = hom / float(self.n**f.vertices)
        return out

    @property
    def log_counts(self) -> np.ndarray:
        return np.log(self.counts.astype(float))

    def key_density(self, key) -> np.ndarray:
        return np.array(
            [raw_to_hom(f, int(k)) / self.n**f.vertices for f, k in zip(self.families, key)], dtype=float
        )

    def index_of(self, key) -> int | None:
        key = np.asarray(key, dtype=np.int64)
        hit = np.nonzero((self.keys == key).all(axis=1))[0]
        return int(hit[0]) if hit.size else None

    def as_dict(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(x) for x in k): int(c) for k, c in zip(self.keys, self.counts)}

    def marginal(self, columns) -> "StatTable":
        """Table over a subset of the family columns (counts summed)."""
        columns = list(columns)
        acc: dict[tuple[int, ...], int] = {}
        for k, c in zip(self.keys, self.counts):
            kk = tuple(int(k[i]) for i in columns)
            acc[kk] = acc.get(kk, 0) + int(c)
        return _table_from_dict(self.n, tuple(self.families[i] for i in columns), acc)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f.name for f in self.families] + ["count"])
            for k, c in zip(self.keys, self.counts):
                w.writerow([int(x) for x in k] + [int(c)])


def _table_from_dict(n, families, acc) -> StatTable:
    items = sorted(acc.items())
    keys = np.array([k for k, _ in items], dtype=np.int64).reshape(len(items), len(families))
    counts = np.array([c for _, c in items], dtype=np.int64)
    return StatTable(n, tuple(families), keys, counts)


def read_table_csv(path: str | Path, n: int) -> StatTable:
    from .graphs import parse_family

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    families = tuple(parse_family(h) for h in rows[0][:-1])
    acc = {tuple(int(x) for x in r[:-1]): int(r[-1]) for r in rows[1:] if r}
    return _table_from_dict(n, families, acc)


def enumerate_graphs(n: int, families, chunks: int = 1, threads: int | None = None) -> StatTable:
    """Exact :class:`StatTable` over all ``2**C(n,2)`` labeled graphs.

    The mask range is walked in Gray-code order (one edge toggled per step) and
    split into ``chunks`` contiguous pieces; the merged table does not depend on
    the chunking.
    """
    families = tuple(families)
    if not families:
        raise ValueError("family list is empty")
    if not 2 <= n <= MAX_N:
        raise ValueError(f"n must be in [2, {MAX_N}], got {n}")
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    pi = np.array([p[0] for p in pairs], dtype=np.int64)
    pj = np.array([p[1] for p in pairs], dtype=np.int64)
    codes = [_family_code(f) for f in families]
    kinds = np.array([c[0] for c in codes], dtype=np.int64)
    exps = np.array([c[1] for c in codes], dtype=np.int64)
    radices = [stat_radix(f, n) for f in families]
    mults_py = [math.prod(radices[i + 1 :]) for i in range(len(radices))]
    span = math.prod(radices)
    if span >= 1 << 62:
        raise ValueError("statistic vector too wide to encode; use fewer or smaller families")
    mults = np.array(mults_py, dtype=np.int64)
    use_dense = span <= DENSE_LIMIT
    total = 1 << len(pairs)
    chunks = max(1, min(chunks, total))
    bounds = [total * c // chunks for c in range(chunks + 1)]

    def run(c):
        dense = np.zeros(span if use_dense else 1, dtype=np.int64)
        sparse = _new_sparse()
        _walk(n, pi, pj, kinds, exps, mults, bounds[c], bounds[c + 1], dense, sparse, use_dense)
        return dense, sparse

    if chunks > 1 and (threads is None or threads > 1):
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(chunks)))
    else:
        parts = [run(c) for c in range(chunks)]

    acc: dict[int, int] = {}
    for dense, sparse in parts:
        if use_dense:
            for code in np.nonzero(dense)[0]:
                acc[int(code)] = acc.get(int(code), 0) + int(dense[code])
        else:
            for code, cnt in sparse.items():
                acc[int(code)] = acc.get(int(code), 0) + int(cnt)
    decoded = {}
    for code, cnt in acc.items():
        key = []
        for mlt, rad in zip(mults_py, radices):
            key.append((code // mlt) % rad)
        decoded[tuple(key)] = cnt
    return _table_from_dict(n, families, decoded)


def enumerate_bruteforce(n: int, families) -> StatTable:
    """Slow reference: decode every edge mask and recount from scratch."""
    families = tuple(families)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    acc: dict[tuple[int, ...], int] = {}
    for mask in range(1 << len(pairs)):
        g = LabeledGraph.from_edges(n, [p for b, p in enumerate(pairs) if mask >> b & 1])
        key = tuple(raw_stat(f, g) for f in families)
        acc[key] = acc.get(key, 0) + 1
    return _table_from_dict(n, families, acc)


# --- canonical ensemble over buckets -------------------------------------------------


def _log_weights(table: StatTable, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(table.m)
    return table.log_counts + table.n**2 * (table.densities @ theta)


def partition_log(table: StatTable, theta) -> float:
    """``psi_n(theta) = log(sum_G exp(n^2 theta . T(G))) / n^2``."""
    return float(logsumexp(_log_weights(table, theta))) / table.n**2


def bucket_probabilities(table: StatTable, theta) -> np.ndarray:
    lw = _log_weights(table, theta)
    return np.exp(lw - logsumexp(lw))


def canonical_mean(table: StatTable, theta) -> np.ndarray:
    """Canonical expectation of the density vector (the gradient of ``psi_n``)."""
    return bucket_probabilities(table, theta) @ table.densities


def canonical_cov(table: StatTable, theta) -> np.ndarray:
    """Covariance of the density vector; ``n^2`` times it is the Hessian of ``psi_n``."""
    p = bucket_probabilities(table, theta)
    t = table.densities
    d = t - p @ t
    return (d * p[:, None]).T @ d


def micro_count(table: StatTable, key) -> int:
    """Number of graphs with exactly the statistics ``key`` (0 if none)."""
    idx = table.index_of(key)
    return 0 if idx is None else int(table.counts[idx])


def snap_to_key(table: StatTable, target) -> tuple[int, ...]:
    """Nearest achievable key to a density vector (ties go to the smaller key)."""
    target = np.asarray(target, dtype=float).reshape(table.m)
    dist = np.linalg.norm(table.densities - target, axis=1)
    best = dist.min()
    idx = int(np.nonzero(dist <= best + 1e-15)[0][0])
    return tuple(int(x) for x in table.keys[idx])


def uniform_means(n: int, families) -> np.ndarray:
    """Exact densities averaged over all graphs (theta = 0), in closed form."""
    out = []
    for f in families:
        if f.kind == "edge":
            out.append((n - 1) / (2 * n))
        elif f.kind == "triangle":
            out.append((n - 1) * (n - 2) / (8 * n * n))
        else:
            out.append(er_star_moment(n, f.star_exponent, 0.5))
    return np.array(out)


def er_star_moment(n: int, j: int, p: float) -> float:
    """``E[t(star_j, G(n, p))]`` from the binomial degree law."""
    deg = np.arange(n)
    pmf = np.array([math.comb(n - 1, d) * p**d * (1 - p) ** (n - 1 - d) for d in deg])
    return float(n * (pmf @ deg.astype(float) ** j)) / n ** (j + 1)


def er_moments(n: int, families, p: float) -> np.ndarray:
    """Exact Erdos-Renyi ``G(n, p)`` expectations of the homomorphism densities."""
    out = []
    for f in families:
        if f.kind == "edge":
            out.append(p * (n - 1) / n)
        elif f.kind == "triangle":
            out.append(p**3 * (n - 1) * (n - 2) / n**2)
        else:
            out.append(er_star_moment(n, f.star_exponent, p))
    return np.array(out)


# --- faces of the achievable hull ----------------------------------------------------


@dataclass(frozen=True)
class Face:
    """Minimal face of the key hull containing a target.

    ``mask`` selects the keys on the face; ``normals`` are the successive
    supporting directions ``a`` with ``a . (T - target) >= 0`` on the remaining
    keys (the multiplier runs off to ``-infinity`` along each of them).
    """

    mask: np.ndarray
    normals: tuple[np.ndarray, ...]

    @property
    def is_full(self) -> bool:
        return not self.normals

    @property
    def size(self) -> int:
        return int(self.mask.sum())


def in_hull(points: np.ndarray, x: np.ndarray, tol: float = 1e-10) -> bool:
    k, m = points.shape
    a_eq = np.vstack([points.T, np.ones((1, k))])
    b_eq = np.concatenate([x, [1.0]])
    res = linprog(np.zeros(k), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * k, method="highs")
    if res.status != 0:
        return False
    return bool(np.abs(a_eq @ res.x - b_eq).max() <= tol * 10)


def minimal_face(points: np.ndarray, x, tol: float = 1e-10) -> Face:
    """Minimal face of ``conv(points)`` that contains ``x``.

    Raises :class:`InfeasibleConstraint` if ``x`` is outside the hull.
    """
    points = np.asarray(points, dtype=float)
    x = np.asarray(x, dtype=float)
    if not in_hull(points, x):
        raise InfeasibleConstraint("target lies outside the hull of achievable densities")
    scale = max(1.0, float(np.abs(points).max()))
    active = np.ones(points.shape[0], dtype=bool)
    normals = []
    m = points.shape[1]
    while True:
        d = (points[active] - x) / scale
        if np.abs(d).max() <= tol:
            break
        res = linprog(-d.sum(axis=0), A_ub=-d, b_ub=np.zeros(d.shape[0]), bounds=[(-1, 1)] * m, method="highs")
        if res.status != 0 or -res.fun <= tol:
            break
        a = res.x
        vals = d @ a
        keep = vals <= tol
        normals.append(a)
        idx = np.nonzero(active)[0]
        active[idx[~keep]] = False
    return Face(active, tuple(normals))


def key_face(table: StatTable, target) -> Face:
    return minimal_face(table.densities, np.asarray(target, dtype=float))
