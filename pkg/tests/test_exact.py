import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from densequiv.errors import InfeasibleConstraint
from densequiv.exact import (
    bucket_probabilities,
    canonical_cov,
    canonical_mean,
    enumerate_bruteforce,
    enumerate_graphs,
    er_moments,
    in_hull,
    key_face,
    micro_count,
    minimal_face,
    partition_log,
    read_table_csv,
    snap_to_key,
    uniform_means,
)
from densequiv.graphs import EDGE, TRIANGLE, WEDGE, parse_families, star

from .conftest import all_graphs


def test_n3_table():
    t = enumerate_graphs(3, [EDGE, TRIANGLE])
    assert t.as_dict() == {(0, 0): 1, (1, 0): 3, (2, 0): 3, (3, 1): 1}


@pytest.mark.parametrize("n", range(2, 8))
def test_total_count(n, tables):
    assert tables(n, "edge,triangle").total == 2 ** math.comb(n, 2)


def test_triangle_free_count(tables):
    assert micro_count(tables(4, "triangle"), (0,)) == 41
    assert tables(4, "edge,triangle").marginal([1]).as_dict()[(0,)] == 41


@pytest.mark.parametrize("fams", ["edge,triangle", "wedge", "star3,triangle", "edge,star2,triangle"])
@pytest.mark.parametrize("n", [4, 5])
def test_gray_walk_matches_bruteforce(n, fams):
    f = parse_families(fams)
    assert enumerate_graphs(n, f).as_dict() == enumerate_bruteforce(n, f).as_dict()


@pytest.mark.parametrize("chunks", [1, 2, 7, 64])
def test_chunking_is_deterministic(chunks):
    ref = enumerate_graphs(6, [EDGE, TRIANGLE])
    t = enumerate_graphs(6, [EDGE, TRIANGLE], chunks=chunks, threads=2)
    assert np.array_equal(t.keys, ref.keys) and np.array_equal(t.counts, ref.counts)


def test_enumerate_errors():
    with pytest.raises(ValueError):
        enumerate_graphs(9, [EDGE])
    with pytest.raises(ValueError):
        enumerate_graphs(1, [EDGE])
    with pytest.raises(ValueError):
        enumerate_graphs(4, [])


def test_key_density_conversion(tables):
    t = tables(4, "edge,triangle")
    assert np.allclose(t.key_density((6, 4)), [12 / 16, 24 / 64])


def test_partition_log_examples(tables):
    t4 = tables(4, "edge,triangle")
    assert partition_log(t4, [0, 0]) == pytest.approx(6 * math.log(2) / 16, abs=1e-15)
    t3 = tables(3, "edge")
    for th in (-1.3, 0.2, 2.0):
        oracle = math.log((1 + math.exp(2 * th)) ** 3) / 9
        assert partition_log(t3, [th]) == pytest.approx(oracle, abs=1e-14)
    tri = tables(4, "triangle")
    assert partition_log(tri, [-50.0]) == pytest.approx(math.log(41) / 16, abs=1e-12)


def test_canonical_mean_examples(tables):
    assert canonical_mean(tables(4, "edge"), [0])[0] == pytest.approx(0.375, abs=1e-15)
    assert canonical_mean(tables(4, "triangle"), [0])[0] == pytest.approx(3 / 64, abs=1e-15)
    th = 0.5 * math.log(0.7 / 0.3)
    assert canonical_mean(tables(5, "edge"), [th])[0] == pytest.approx(0.56, abs=1e-14)


@pytest.mark.parametrize("fams", ["edge,triangle", "star2", "star3,edge"])
@pytest.mark.parametrize("n", [4, 5, 6])
def test_uniform_means_closed_form(n, fams, tables):
    t = tables(n, fams)
    assert np.allclose(canonical_mean(t, np.zeros(t.m)), uniform_means(n, t.families), atol=1e-14)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.7])
def test_er_moments_match_enumeration(p, tables):
    # ER(p) is the canonical law with theta1 = I'(p) on the edge coordinate only
    t = tables(5, "edge,triangle,star3")
    th = [0.5 * math.log(p / (1 - p)), 0.0, 0.0]
    assert np.allclose(canonical_mean(t, th), er_moments(5, t.families, p), atol=1e-13)


def test_micro_count_examples(tables):
    t3 = tables(3, "edge,triangle")
    assert micro_count(t3, (3, 1)) == 1
    assert micro_count(t3, (2, 1)) == 0


def test_snap_ties_go_to_smaller_key(tables):
    t = tables(3, "edge")
    # 1/9 lies halfway between E=0 (0) and E=1 (2/9)
    assert snap_to_key(t, [1 / 9]) == (0,)
    assert snap_to_key(t, [0.2222]) == (1,)


@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_gradient_is_mean(theta):
    t = enumerate_graphs(5, [EDGE, TRIANGLE])
    h = 1e-6
    grad = []
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        grad.append((partition_log(t, np.add(theta, e)) - partition_log(t, np.subtract(theta, e))) / (2 * h))
    assert np.allclose(grad, canonical_mean(t, theta), atol=1e-6)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_hessian_psd(theta):
    t = enumerate_graphs(5, [EDGE, WEDGE, TRIANGLE])
    cov = canonical_cov(t, theta)
    assert np.allclose(cov, cov.T)
    assert np.linalg.eigvalsh(cov).min() >= -1e-14
    assert bucket_probabilities(t, theta).sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_triangle_free_log_count_bracket(n, tables):
    # the limit is -inf I over triangle-free graphons = log(2)/4 (half-density bipartite);
    # at small n the rate sits between that and the unconstrained rate C(n,2) log 2 / n^2
    rate = math.log(micro_count(tables(n, "triangle"), (0,))) / n**2
    assert math.log(2) / 4 < rate < math.comb(n, 2) * math.log(2) / n**2


def test_minimal_face():
    pts = np.array([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]], dtype=float)
    assert minimal_face(pts, [0.5, 0.5]).is_full
    f = minimal_face(pts, [0.5, 0.0])
    assert not f.is_full and f.mask.tolist() == [True, True, False, False, False]
    corner = minimal_face(pts, [0.0, 0.0])
    assert corner.size == 1
    with pytest.raises(InfeasibleConstraint):
        minimal_face(pts, [1.5, 0.5])
    assert in_hull(pts, np.array([0.2, 0.9])) and not in_hull(pts, np.array([1.2, 0.9]))


def test_key_face_triangle_free(tables):
    t = tables(5, "triangle")
    face = key_face(t, t.key_density((0,)))
    assert face.size == 1 and not face.is_full


def test_csv_round_trip(tmp_path, tables):
    t = tables(5, "edge,triangle")
    path = tmp_path / "t.csv"
    t.to_csv(path)
    assert path.read_text().splitlines()[0] == "edge,triangle,count"
    u = read_table_csv(path, 5)
    assert u.as_dict() == t.as_dict() and u.families == t.families


def test_star_bucket_values():
    t = enumerate_graphs(4, [star(3)])
    for g in all_graphs(4):
        key = (sum(d**3 for d in g.degrees()),)
        assert micro_count(t, key) > 0
