import math

import numpy as np
import pytest

from modbanach.geomconst import (
    alpha_beta,
    clarkson_alpha_tail_bound,
    clarkson_alpha_upper,
    clarkson_beta_bound,
    duality_gap,
    jvn_lower_bound,
    jvn_ratio,
    jvn_upper_bound_clarkson,
    tail_parallelogram_defect,
)
from modbanach.nakano import BlockVector, ConstantExponents, FormulaExponents, NakanoSpec
from modbanach.spaces import Euclid, Lp, Schatten

import oracles


def test_jvn_ratio_parallelogram_identity():
    rng = np.random.default_rng(0)
    space = Euclid(4)
    for _ in range(20):
        x, y = rng.standard_normal(4), rng.standard_normal(4)
        assert jvn_ratio(space, x, y) == pytest.approx(1.0, rel=1e-12)


def test_jvn_ratio_rejects_double_zero():
    with pytest.raises(ValueError, match="not both vanish"):
        jvn_ratio(Euclid(2), np.zeros(2), np.zeros(2))


def test_jvn_lower_bound_euclid_is_one():
    for d in (2, 5, 8):
        est = jvn_lower_bound(Euclid(d), budget=16, seed=0)
        assert abs(est.lower_bound - 1.0) <= 1e-9


def test_jvn_lower_bound_l4_plane():
    est = jvn_lower_bound(Lp(4.0, 2), budget=64, seed=0)
    assert est.lower_bound == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert est.lower_bound <= jvn_upper_bound_clarkson(4.0) + 1e-12


def test_jvn_lower_bound_l1_plane_attains_two():
    # disjoint unit vectors make the parallelogram ratio equal 2 in l_1
    est = jvn_lower_bound(Lp(1.0, 2), budget=16, seed=0)
    assert est.lower_bound == pytest.approx(2.0, abs=1e-9)


def test_jvn_estimate_bounds_and_witness():
    for space in (Lp(3.0, 3), Schatten(4.0, 2)):
        est = jvn_lower_bound(space, budget=16, seed=1)
        assert 1.0 - 1e-9 <= est.lower_bound <= 2.0 + 1e-9
        # the recorded witness must reproduce the recorded value
        again = jvn_ratio(space, est.witness.x, est.witness.y)
        assert again == pytest.approx(est.witness.value, abs=1e-10)
        assert est.lower_bound == pytest.approx(est.witness.value, abs=1e-12)
        assert est.starts > 0 and est.evaluations > 0


def test_jvn_deterministic_for_fixed_seed():
    a = jvn_lower_bound(Lp(3.0, 2), budget=8, seed=7)
    b = jvn_lower_bound(Lp(3.0, 2), budget=8, seed=7)
    assert a.lower_bound == b.lower_bound
    np.testing.assert_array_equal(a.witness.x, b.witness.x)


def test_jvn_schatten_finds_hilbert_excess():
    # S_4 on 2x2 matrices contains an l_4^2 copy (diagonal matrices), so the
    # estimator must reach at least sqrt(2) there
    est = jvn_lower_bound(Schatten(4.0, 2), budget=48, seed=0)
    assert est.lower_bound >= math.sqrt(2.0) - 1e-6
    assert est.lower_bound <= jvn_upper_bound_clarkson(4.0) + 1e-9


def test_clarkson_upper_bound_values():
    assert jvn_upper_bound_clarkson(2.0) == 1.0
    assert jvn_upper_bound_clarkson(4.0) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert jvn_upper_bound_clarkson(1.0) == pytest.approx(2.0, rel=1e-15)
    assert jvn_upper_bound_clarkson(4.0 / 3.0) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    with pytest.raises(ValueError):
        jvn_upper_bound_clarkson(0.5)


def test_estimates_never_exceed_clarkson():
    for p in (1.5, 2.5, 3.0, 4.0):
        est = jvn_lower_bound(Lp(p, 3), budget=24, seed=3)
        assert est.lower_bound <= jvn_upper_bound_clarkson(p) + 1e-9


def test_jvn_matches_angle_grid_oracle_l3():
    est = jvn_lower_bound(Lp(3.0, 2), budget=48, seed=0)
    ref = oracles.jvn_grid_oracle(3.0, coarse=90, rounds=3)
    assert est.lower_bound == pytest.approx(ref, abs=1e-6)


def test_duality_gap_small():
    assert duality_gap(3.0, 2, budget=48, seed=0) <= 1e-3
    with pytest.raises(ValueError):
        duality_gap(1.0, 2)


def test_alpha_beta_matches_loop_oracle():
    ps = 2.0 + 1.0 / np.arange(1, 40)
    avals = np.array([jvn_upper_bound_clarkson(p) for p in ps])
    rep = alpha_beta(ps, avals)
    ref_alpha, ref_beta = oracles.alpha_beta_loop(ps, avals)
    np.testing.assert_allclose(rep.alpha, ref_alpha, rtol=1e-14)
    np.testing.assert_allclose(rep.beta, ref_beta, rtol=1e-14)


def test_alpha_beta_invariants():
    ps = 2.0 + 1.0 / np.arange(1, 200)
    avals = np.array([jvn_upper_bound_clarkson(p) for p in ps])
    rep = alpha_beta(ps, avals)
    assert np.all(np.diff(rep.beta) <= 0.0)
    assert np.all(rep.beta >= rep.alpha)
    assert np.all(rep.alpha >= 1.0 - 1e-12)
    # suffix property: beta_n is exactly the max of alpha over the tail
    k = 17
    assert rep.beta[k] == np.max(rep.alpha[k:])


def test_alpha_beta_tail_bound_floors():
    ps = np.array([2.5, 2.25])
    avals = np.ones(2)
    rep = alpha_beta(ps, avals, tail_bound=9.0)
    assert np.all(rep.beta == 9.0)


def test_alpha_beta_rejects_bad_input():
    with pytest.raises(ValueError):
        alpha_beta([], [])
    with pytest.raises(ValueError):
        alpha_beta([2.0, 3.0], [1.0])
    with pytest.raises(ValueError):
        alpha_beta([2.0], [0.5])
    with pytest.raises(ValueError):
        alpha_beta([0.2], [1.0])


def test_clarkson_alpha_upper_monotone_in_gap():
    assert clarkson_alpha_upper(2.0) == 1.0
    gaps = [clarkson_alpha_upper(2.0 + g) for g in (0.0, 0.1, 0.5, 1.0)]
    assert gaps == sorted(gaps)
    below = [clarkson_alpha_upper(2.0 - g) for g in (0.0, 0.1, 0.5)]
    assert below == sorted(below)


def test_clarkson_tail_bound_is_sup_at_horizon():
    e = FormulaExponents("power", 1.0)
    got = clarkson_alpha_tail_bound(e, horizon=100)
    assert got == pytest.approx(clarkson_alpha_upper(e.value(101)), rel=1e-14)
    with pytest.raises(TypeError):
        clarkson_alpha_tail_bound(ConstantExponents(2.5), horizon=10)


def test_clarkson_beta_bound_decreases_with_cutoff():
    spec = NakanoSpec(FormulaExponents("power", 1.0))
    vals = [clarkson_beta_bound(spec, n) for n in (1, 5, 10, 100)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1.05


def test_tail_defect_below_beta_bound():
    spec = NakanoSpec(FormulaExponents("power", 1.0))
    for cutoff in (5, 20):
        defect = tail_parallelogram_defect(spec, cutoff, samples=200, seed=0)
        assert defect <= clarkson_beta_bound(spec, cutoff) + 1e-9
        assert defect >= 1.0 - 0.05  # near-parallelogram pairs exist in the sample


def test_tail_defect_rejects_low_support():
    spec = NakanoSpec(FormulaExponents("power", 1.0))
    bad = [(BlockVector(((1, np.array([1.0])),)), BlockVector(((6, np.array([1.0])),)))]
    with pytest.raises(ValueError, match="below the cutoff"):
        tail_parallelogram_defect(spec, 5, pairs=bad)
