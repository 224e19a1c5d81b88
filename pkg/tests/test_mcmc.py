import math

import numpy as np
import pytest

from densequiv.exact import bucket_probabilities, canonical_mean
from densequiv.graphs import EDGE, TRIANGLE, LabeledGraph, star
from densequiv.mcmc import SamplerConfig, averaging_check, batch_means_se, local_maxima, run_chain


def test_config_validation():
    with pytest.raises(ValueError):
        SamplerConfig(6, (EDGE,), (0.0,), steps=100, burnin=100)
    with pytest.raises(ValueError):
        SamplerConfig(6, (EDGE,), (0.0,), steps=1000, thin=0)
    with pytest.raises(ValueError):
        SamplerConfig(6, (EDGE,), (0.0,), steps=1000, chains=0)
    with pytest.raises(ValueError):
        SamplerConfig(6, (EDGE,), (0.0, 1.0), steps=1000)
    with pytest.raises(ValueError):
        SamplerConfig(6, (EDGE,), (math.inf,), steps=1000)
    with pytest.raises(ValueError):
        SamplerConfig(6, (EDGE,), (0.0,), steps=100, thin=10)  # fewer records than batches


def test_uniform_edge_mean():
    s = run_chain(SamplerConfig(6, (EDGE,), (0.0,), steps=400_000, burnin=10_000, thin=10, seed=1))
    assert abs(s.means[0] - 5 / 12) <= 3 * s.se[0]
    assert s.acceptance == 1.0  # zero field accepts every flip


def test_triangle_small_n_matches_exact(tables):
    t = tables(6, "triangle")
    exact = canonical_mean(t, [0.05])[0]
    s = run_chain(SamplerConfig(6, (TRIANGLE,), (0.05,), steps=2_000_000, burnin=20_000, thin=10, seed=7, chains=2))
    assert abs(s.means[0] - exact) <= 3 * s.se[0]


def test_edge_triangle_small_n_matches_exact(tables):
    t = tables(6, "edge,triangle")
    theta = (-0.2, 0.4)
    exact = canonical_mean(t, theta)
    s = run_chain(SamplerConfig(6, (EDGE, TRIANGLE), theta, steps=2_000_000, burnin=20_000, thin=10, seed=3))
    assert np.all(np.abs(s.means - exact) <= 3 * s.se)


def test_triangle_n200_prediction():
    s = run_chain(SamplerConfig(200, (TRIANGLE,), (0.187716,), steps=4_000_000, burnin=1_000_000, thin=100, seed=42))
    assert s.means[0] == pytest.approx(0.216, abs=0.02)


def test_detailed_balance_n4(tables):
    t = tables(4, "edge,triangle")
    theta = (0.3, -0.6)
    cfg = SamplerConfig(4, (EDGE, TRIANGLE), theta, steps=10_000_000, burnin=10_000, thin=10, seed=11)
    s = run_chain(cfg, keep_trace=True)
    raw = s.raw[0].astype(np.int64)
    probs = bucket_probabilities(t, theta)
    for key, p in zip(t.keys, probs):
        ind = np.all(raw == key, axis=1).astype(float)[:, None]
        se = batch_means_se(ind)[0]
        assert abs(ind.mean() - p) <= 3 * max(se, 1e-12), (tuple(key), ind.mean(), p, se)


def test_seed_determinism():
    cfg = SamplerConfig(12, (EDGE, TRIANGLE), (0.1, 0.2), steps=50_000, thin=5, seed=9, chains=2)
    a = run_chain(cfg, keep_trace=True)
    b = run_chain(cfg, keep_trace=True, threads=2)
    assert all(np.array_equal(x, y) for x, y in zip(a.raw, b.raw))
    assert np.array_equal(a.means, b.means)
    c = run_chain(SamplerConfig(12, (EDGE, TRIANGLE), (0.1, 0.2), steps=50_000, thin=5, seed=10, chains=2))
    assert not np.array_equal(a.means, c.means)


@pytest.mark.parametrize("theta", [(0.5,), (-1.0,), (2.0,)])
def test_acceptance_strictly_inside(theta):
    s = run_chain(SamplerConfig(10, (TRIANGLE,), theta, steps=20_000, seed=0))
    assert 0 < s.acceptance < 1
    assert np.all((s.means >= 0) & (s.means <= 1)) and np.all(s.se >= 0)


def test_initial_graph_is_used():
    k = LabeledGraph.complete(8)
    s = run_chain(SamplerConfig(8, (EDGE,), (0.0,), steps=32, seed=0), initial=k, keep_trace=True)
    # after one flip from K8 the edge count is 27
    assert s.raw[0][0, 0] == 27


def test_averaging_star2():
    r = averaging_check(150, star(2), 0.49, steps=3_000_000, seed=1)
    assert r.u_star == pytest.approx(0.7, abs=1e-12)
    assert r.error <= 0.02 and r.warning is None


def test_averaging_edge():
    r = averaging_check(100, EDGE, 0.3, steps=2_000_000, seed=2)
    assert abs(r.summary.means[0] - 0.3) <= 0.01
    assert r.adjusted == pytest.approx(0.3 * 99 / 100, abs=1e-15)
    assert r.adjusted_error <= 0.01


def test_local_maxima_counts():
    assert local_maxima([0.0], [1]) == 1
    assert local_maxima([-3.0, 3.0], [1, 2]) == 2
