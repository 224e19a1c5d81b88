import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from densequiv.graphon import (
    StepGraphon,
    common_refinement,
    cut_distance,
    cut_norm_exact,
    cut_norm_heuristic,
    delta_cut_upper,
    density,
    graphon_of_graph,
    permuted,
    rate_functional,
    rate_scalar,
    read_graphon,
    scallop_graphon,
    scallop_parameters,
    scallop_parameters_exact,
    scallop_triangle_density,
    scallop_triangle_unordered,
    write_graphon,
)
from densequiv.graphs import EDGE, TRIANGLE, WEDGE, LabeledGraph, hom_density, star

from .conftest import all_graphs

FAMILIES = [EDGE, WEDGE, TRIANGLE, star(2), star(3), star(4)]
BIPARTITE = StepGraphon.equal_blocks([[0, 1], [1, 0]])


@st.composite
def step_graphons(draw, max_k=4):
    k = draw(st.integers(1, max_k))
    raw = draw(st.lists(st.floats(0.05, 1.0), min_size=k, max_size=k))
    w = np.array(raw) / sum(raw)
    w[-1] = 1 - w[:-1].sum()
    vals = draw(st.lists(st.floats(0.0, 1.0), min_size=k * k, max_size=k * k))
    v = np.array(vals).reshape(k, k)
    v = np.triu(v) + np.triu(v, 1).T
    return StepGraphon(w, v)


def brute_cut_norm(weighted):
    """Max over all row and column subsets of |sum over S x T|."""
    k = weighted.shape[0]
    best = 0.0
    for s in itertools.product([0, 1], repeat=k):
        for t in itertools.product([0, 1], repeat=k):
            best = max(best, abs(np.array(s) @ weighted @ np.array(t)))
    return best


def test_validation():
    with pytest.raises(ValueError):
        StepGraphon([0.5, 0.4], [[0, 0], [0, 0]])
    with pytest.raises(ValueError):
        StepGraphon([1.0], [[1.5]])
    with pytest.raises(ValueError):
        StepGraphon([0.5, 0.5], [[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        StepGraphon([1.0, 0.0], [[0, 0], [0, 0]])


def test_graphon_of_graph_examples():
    k2 = graphon_of_graph(LabeledGraph.complete(2))
    assert k2.k == 2 and np.array_equal(k2.values, [[0, 1], [1, 0]])
    assert not graphon_of_graph(LabeledGraph.empty(3)).values.any()
    path = graphon_of_graph(LabeledGraph.from_edges(3, [(0, 1), (1, 2)]))
    assert np.array_equal(path.values, [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert np.allclose(path.widths, 1 / 3)


def test_density_examples():
    assert density(TRIANGLE, StepGraphon.constant(0.5)) == pytest.approx(0.125, abs=1e-15)
    assert density(EDGE, BIPARTITE) == pytest.approx(0.5, abs=1e-15)
    assert density(TRIANGLE, BIPARTITE) == 0
    assert density(star(3), StepGraphon.constant(0.4)) == pytest.approx(0.064, abs=1e-15)
    assert density(WEDGE, StepGraphon.constant(0.3)) == pytest.approx(0.09, abs=1e-15)


@pytest.mark.parametrize("n", range(2, 6))
def test_density_matches_graph_exactly(n):
    for g in all_graphs(n):
        h = graphon_of_graph(g, exact=True)
        for f in FAMILIES:
            assert density(f, h) == hom_density(f, g)


@given(st.integers(6, 6).flatmap(lambda n: st.lists(st.booleans(), min_size=15, max_size=15)))
def test_density_matches_graph_n6(bits):
    pairs = list(itertools.combinations(range(6), 2))
    g = LabeledGraph.from_edges(6, [p for p, b in zip(pairs, bits) if b])
    h = graphon_of_graph(g, exact=True)
    for f in FAMILIES:
        assert density(f, h) == hom_density(f, g)


def test_rate_scalar_examples():
    assert rate_scalar(0.0) == 0 and rate_scalar(1.0) == 0
    assert rate_scalar(0.5) == pytest.approx(-math.log(2) / 2, abs=1e-15)
    assert rate_scalar(0.5, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert rate_scalar(0.3, 0.7) == pytest.approx(0.5 * (0.3 * math.log(3 / 7) + 0.7 * math.log(7 / 3)), abs=1e-15)
    for bad in (-0.1, 1.1, float("nan")):
        with pytest.raises(ValueError):
            rate_scalar(bad)
    with pytest.raises(ValueError):
        rate_scalar(0.5, 1.0)


def test_rate_functional_examples():
    assert rate_functional(StepGraphon.constant(0.3)) == pytest.approx(rate_scalar(0.3), abs=1e-15)
    assert rate_functional(BIPARTITE) == 0
    assert rate_functional(graphon_of_graph(LabeledGraph.complete(4))) == 0


@given(step_graphons())
def test_rate_bounds(h):
    val = rate_functional(h)
    assert -math.log(2) / 2 - 1e-15 <= val <= 1e-15
    assert rate_functional(h, 0.3) >= -1e-15


@given(step_graphons(max_k=5))
def test_jensen(h):
    assert rate_functional(h) >= rate_scalar(float(density(EDGE, h))) - 1e-12


def test_cut_distance_examples():
    h = scallop_graphon(0.1).graphon
    assert cut_distance(h, h) == 0
    assert cut_distance(StepGraphon.constant(0.2), StepGraphon.constant(0.7)) == pytest.approx(0.5, abs=1e-15)
    half = StepGraphon.constant(0.5)
    w, v1, v2 = common_refinement(BIPARTITE, half)
    assert w.size == 2
    oracle = brute_cut_norm(np.outer(w, w) * (v1 - v2))
    assert cut_distance(BIPARTITE, half) == pytest.approx(oracle, abs=1e-15)
    assert oracle == pytest.approx(0.125, abs=1e-15)


@given(step_graphons(max_k=3), step_graphons(max_k=3))
def test_cut_norm_against_double_subset_scan(h1, h2):
    w, v1, v2 = common_refinement(h1, h2)
    m = np.outer(w, w) * (v1 - v2)
    assert cut_norm_exact(m) == pytest.approx(brute_cut_norm(m), abs=1e-13)
    assert cut_norm_heuristic(m) <= cut_norm_exact(m) + 1e-13


@given(step_graphons(3), step_graphons(3), step_graphons(3))
def test_cut_distance_metric_axioms(a, b, c):
    dab, dba = cut_distance(a, b), cut_distance(b, a)
    assert dab >= 0
    assert dab == pytest.approx(dba, abs=1e-13)
    assert cut_distance(a, c) <= dab + cut_distance(b, c) + 1e-12


@given(step_graphons(3), step_graphons(3))
def test_counting_lemma(h1, h2):
    d = cut_distance(h1, h2)
    for f in FAMILIES:
        gap = abs(float(density(f, h1)) - float(density(f, h2)))
        assert gap <= 4 * f.edges * d + 1e-12
        # the sharper classical constant also holds
        assert gap <= f.edges * d + 1e-12


def test_cut_distance_large_refinement():
    rng = np.random.default_rng(1)
    v = rng.random((24, 24))
    h = StepGraphon.equal_blocks(np.triu(v) + np.triu(v, 1).T)
    with pytest.raises(ValueError):
        cut_distance(h, StepGraphon.constant(0.5), exact=True)
    with pytest.warns(UserWarning):
        assert cut_distance(h, StepGraphon.constant(0.5)) > 0


def test_delta_cut_upper_permutation():
    h = StepGraphon.equal_blocks([[0.1, 0.9, 0.3], [0.9, 0.5, 0.2], [0.3, 0.2, 0.7]])
    g = permuted(h, [2, 0, 1])
    assert cut_distance(h, g) > 0
    assert delta_cut_upper(h, g) == pytest.approx(0, abs=1e-15)
    assert delta_cut_upper(h, g) <= cut_distance(h, g)


def test_scallop_parameters_rational():
    c, p = scallop_parameters_exact(Fraction(1, 8))
    assert (c, p) == (Fraction(5, 12), Fraction(40, 49))
    cf, pf = scallop_parameters(1 / 8)
    assert cf == pytest.approx(5 / 12, abs=1e-15) and pf == pytest.approx(40 / 49, abs=1e-15)
    with pytest.raises(ValueError):
        scallop_parameters(1 / 6)
    with pytest.raises(ValueError):
        scallop_parameters_exact(Fraction(1, 10))


def test_scallop_densities():
    sc = scallop_graphon(1 / 8)
    assert density(EDGE, sc.graphon) == pytest.approx(0.625, abs=1e-12)
    assert density(TRIANGLE, sc.graphon) == pytest.approx(25 / 144, abs=1e-12)
    assert scallop_triangle_density(1 / 8) == pytest.approx(25 / 144, abs=1e-15)
    # the per-unordered-triangle closed form is one sixth of the homomorphism density
    assert scallop_triangle_unordered(1 / 8) * 6 == pytest.approx(25 / 144, abs=1e-15)
    c, p = 5 / 12, 40 / 49
    assert rate_functional(sc.graphon) == pytest.approx((1 - c) ** 2 / 2 * rate_scalar(p), abs=1e-12)


@pytest.mark.parametrize("eps", np.linspace(0.001, 0.166, 25))
def test_scallop_edge_identity(eps):
    sc = scallop_graphon(eps)
    assert density(EDGE, sc.graphon) == pytest.approx(0.5 + eps, abs=1e-12)
    assert density(TRIANGLE, sc.graphon) == pytest.approx(scallop_triangle_density(eps), abs=1e-12)


def test_scallop_bipartite_limit():
    c, p = scallop_parameters(1e-12)
    assert c == pytest.approx(0.5, abs=1e-11) and p == pytest.approx(0, abs=1e-11)


def test_graphon_file_round_trip(tmp_path):
    h = scallop_graphon(0.1).graphon
    path = tmp_path / "h.txt"
    write_graphon(h, path)
    g = read_graphon(path)
    assert np.array_equal(g.widths, h.widths) and np.array_equal(g.values, h.values)
    assert path.read_text().splitlines()[0] == "3"
