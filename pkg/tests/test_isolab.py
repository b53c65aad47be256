import math

import numpy as np
import pytest

from modbanach.isolab import (
    AmbiguousRankError,
    LinearMap,
    SplitSpace,
    TwoProjectionCandidate,
    block_diag_map,
    block_sum_complement_check,
    build_counterexample_embedding,
    build_inclusion_embedding,
    find_one_dim_two_summand,
    is_isometric_embedding,
    limit_isometry_check,
    pt_iterate,
    range_intersection_dim,
    two_projection_violation,
    two_summand_grid_floor,
)
from modbanach.spaces import Euclid, Lp, TwoSum


def test_split_space_norm():
    s = SplitSpace(Lp(4.0, 2), Euclid(3))
    assert s.dim == 5
    x = np.array([1.0, 1.0, 3.0, 0.0, 4.0])
    assert s.norm(x) == pytest.approx(math.hypot(Lp(4.0, 2).norm(x[:2]), 5.0), rel=1e-14)
    e0_part, h_part = s.split(x)
    assert e0_part.shape == (2,) and h_part.shape == (3,)


def test_linear_map_validation_and_immutability():
    m = np.eye(3)
    t = LinearMap(m, Euclid(3), Euclid(3))
    with pytest.raises(ValueError):
        LinearMap(np.eye(2), Euclid(3), Euclid(3))
    with pytest.raises(ValueError):
        t.matrix[0, 0] = 2.0
    m[0, 0] = 5.0  # the map keeps its own copy
    assert t.matrix[0, 0] == 1.0
    np.testing.assert_array_equal(t.apply(np.array([1.0, 2.0, 3.0])), [1.0, 2.0, 3.0])


def test_inclusion_embedding_is_isometric():
    for e0 in (Euclid(3), Lp(4.0, 2), TwoSum((Lp(4.0, 2), Euclid(1)))):
        t = build_inclusion_embedding(e0, h_dim=4)
        chk = is_isometric_embedding(t, samples=128, seed=0)
        assert chk.isometric
        assert chk.max_deviation <= 1e-12


def test_counterexample_embedding_is_isometric():
    t = build_counterexample_embedding(Lp(4.0, 2), h_dim=4)
    assert t.domain.dim == 3 and t.codomain.dim == 7
    chk = is_isometric_embedding(t, samples=256, seed=0)
    assert chk.isometric
    assert chk.max_deviation <= 1e-12


def test_pt_iterate_inclusion_is_stationary():
    t = build_inclusion_embedding(Lp(4.0, 2), h_dim=3)
    trace = pt_iterate(t, np.array([1.0, -2.0]), n_max=10)
    np.testing.assert_allclose(trace.norms, trace.norms[0], rtol=1e-14)
    np.testing.assert_allclose(trace.residuals, 0.0, atol=1e-15)
    assert np.max(trace.defects) <= 1e-12


def test_pt_iterate_counterexample_kills_the_line():
    t = build_counterexample_embedding(Lp(4.0, 2))
    xi0 = np.array([0.0, 0.0, 1.0])
    trace = pt_iterate(t, xi0, n_max=8)
    assert trace.norms[0] == 1.0
    np.testing.assert_allclose(trace.norms[1:], 0.0, atol=1e-15)
    assert trace.residuals[0] == pytest.approx(1.0, abs=1e-15)
    assert np.max(trace.defects) <= 1e-12
    rows = list(trace.csv_rows())
    assert rows[0] == (1, trace.norms[1], trace.residuals[0], trace.defects[0])


def test_pt_iterate_telescoping_on_mixed_vectors():
    t = build_counterexample_embedding(Lp(4.0, 2))
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = rng.standard_normal(3)
        trace = pt_iterate(t, x, n_max=50)
        assert np.max(trace.defects) <= 1e-10


def test_pt_iterate_requires_split_codomain():
    with pytest.raises(ValueError, match="split"):
        pt_iterate(LinearMap(np.eye(2), Euclid(2), Euclid(2)), np.ones(2))


def test_limit_isometry_check_flags_exactly_xi0():
    t = build_counterexample_embedding(Lp(4.0, 2))
    xs = [np.eye(3)[i] for i in range(3)]
    report = limit_isometry_check(t, xs, n_max=12)
    assert not report.all_passed
    flags = [e.passed for e in report.entries]
    assert flags == [True, True, False]
    assert report.entries[2].norm_x == 1.0
    assert report.entries[2].limit == pytest.approx(0.0, abs=1e-15)
    assert report.non_cauchy == ()
    assert report.summand_found is None


def test_limit_isometry_check_passes_inclusion():
    t = build_inclusion_embedding(Lp(4.0, 2), h_dim=3)
    xs = [np.array([1.0, 0.0]), np.array([1.0, 1.0])]
    report = limit_isometry_check(t, xs, n_max=12)
    assert report.all_passed
    # no one-dimensional hilbertian summand in l_4^2, so the projected map
    # itself must be isometric and is verified to be
    assert report.summand_found is False
    assert report.projection_isometric is True


def test_limit_isometry_check_euclid_reports_summand():
    t = build_inclusion_embedding(Euclid(2), h_dim=2)
    report = limit_isometry_check(t, [np.array([1.0, 2.0])], n_max=12)
    assert report.all_passed
    assert report.summand_found is True
    assert report.projection_isometric is None


def test_range_intersection_dims():
    assert range_intersection_dim(build_inclusion_embedding(Lp(4.0, 2))) == 0
    assert range_intersection_dim(build_counterexample_embedding(Lp(4.0, 2))) == 1


def test_range_intersection_ambiguous_rank():
    # a single range vector leaning into H with cosine inside the ambiguous
    # window must raise, not round
    e0 = Euclid(1)
    codomain = SplitSpace(e0, Euclid(1))
    sigma = 1.0 - 2e-8
    m = np.array([[math.sqrt(1.0 - sigma * sigma)], [sigma]])
    t = LinearMap(m, e0, codomain)
    with pytest.raises(AmbiguousRankError):
        range_intersection_dim(t, tol=1e-8)
    # well inside H: counted; well outside: not
    clear = LinearMap(np.array([[0.0], [1.0]]), e0, codomain)
    assert range_intersection_dim(clear) == 1
    askew = LinearMap(np.array([[math.sqrt(0.5)], [math.sqrt(0.5)]]), e0, codomain)
    assert range_intersection_dim(askew) == 0


def test_two_projection_candidate_validation():
    good = TwoProjectionCandidate(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    good.validate(Euclid(2))
    with pytest.raises(ValueError, match="normalized"):
        TwoProjectionCandidate(np.array([2.0, 0.0]), np.array([1.0, 0.0])).validate(Euclid(2))
    with pytest.raises(ValueError, match="phi"):
        TwoProjectionCandidate(np.array([1.0, 0.0]), np.array([0.0, 1.0])).validate(Euclid(2))


def test_two_projection_violation_euclid_zero():
    cand = TwoProjectionCandidate(np.array([1.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))
    assert two_projection_violation(Euclid(3), cand, samples=64, seed=0) <= 1e-12


def test_two_projection_violation_positive_in_l4():
    cand = TwoProjectionCandidate(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    v = two_projection_violation(Lp(4.0, 2), cand, samples=64, seed=0)
    assert v > 1e-3


def test_summand_search_euclid_succeeds():
    res = find_one_dim_two_summand(Euclid(3), budget=8, seed=0)
    assert res.found
    assert res.residual <= 1e-8
    res.candidate.validate(Euclid(3))


def test_summand_search_l4_fails():
    res = find_one_dim_two_summand(Lp(4.0, 2), budget=8, seed=0)
    assert not res.found
    assert res.residual > 1e-8


def test_grid_floor_positive_for_l4_small_grid():
    floor = two_summand_grid_floor(Lp(4.0, 2), n_xi=90, n_phi=90, samples=64, seed=0)
    assert floor > 0.01


def test_grid_floor_zero_for_euclid():
    floor = two_summand_grid_floor(Euclid(2), n_xi=45, n_phi=45, samples=32, seed=0)
    assert floor <= 1e-10


def test_grid_floor_requires_plane():
    with pytest.raises(ValueError):
        two_summand_grid_floor(Euclid(3))


def test_block_check_true_for_clean_diagonal():
    domain = TwoSum((Lp(4.0, 2), Euclid(1)))
    codomain = TwoSum((Lp(4.0, 2), Euclid(2)))
    u = np.array([[0.0, 1.0], [-1.0, 0.0]])  # signed permutation of l_4^2
    v = np.array([[1.0], [0.0]])
    assert block_sum_complement_check(u, v, domain, codomain) is True


def test_block_check_false_for_isometric_leak():
    # the F-part image leaks into a spare Euclidean direction of E2 while
    # total norms stay intact, so the map is isometric but not block-pure
    domain = TwoSum((Euclid(2), Euclid(1)))
    codomain = TwoSum((Euclid(3), Euclid(1)))
    u = np.vstack([np.eye(2), np.zeros((1, 2))])
    v = np.array([[0.6]])
    coupling = np.array([[0.0], [0.0], [0.8]])
    assert block_sum_complement_check(u, v, domain, codomain, coupling=coupling) is False


def test_block_check_rejects_non_isometry():
    domain = TwoSum((Euclid(2), Euclid(1)))
    codomain = TwoSum((Euclid(2), Euclid(1)))
    u = np.eye(2)
    v = np.array([[1.0]])
    coupling = np.array([[0.5], [0.0]])
    with pytest.raises(ValueError, match="not an isometric embedding"):
        block_sum_complement_check(u, v, domain, codomain, coupling=coupling)
