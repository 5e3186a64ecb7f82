import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distsecret import regions
from distsecret.access import ThresholdParams, all_or_nothing, threshold_structure
from distsecret.errors import ValidationError
from distsecret.source import from_arrays, pairwise_key_source, random_source

from ._gen import random_monotone, random_small_source


@pytest.mark.parametrize("L,D,t,z", [(3, 1, 2, 1), (3, 2, 3, 1), (4, 2, 3, 1), (3, 2, 2, 0), (4, 1, 4, 2)])
def test_pairwise_outer_matches_capacity(L, D, t, z):
    src = pairwise_key_source(L, D)
    A = threshold_structure(L, ThresholdParams(t, z))
    cap, corner = regions.threshold_capacity_region(L, D, ThresholdParams(t, z))
    outer = regions.outer_general(src, A)
    for S in regions.nonempty_subsets(D):
        assert outer.bound[S] == pytest.approx(cap.bound[S], abs=1e-9)
    assert cap.contains(corner)
    assert not cap.contains(np.array(corner) + 1e-3)


def test_two_dealer_pairwise_closed_form():
    # each dealer shares one key bit per participant; r_d = t - z = 2 and the sum is 4
    src = pairwise_key_source(4, 2)
    fm = regions.inner_d2_fm(src, threshold_structure(4, ThresholdParams(3, 1)))
    assert (fm.r1, fm.r2) == pytest.approx((2.0, 2.0), abs=1e-9)
    assert fm.sum_bound == pytest.approx(4.0, abs=1e-9)


def test_single_dealer_common_bit():
    # Y = X1 = X2 uniform bit: anyone alone decodes, so nothing is secret from singletons
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = p[1, 1, 1] = 0.5
    src = from_arrays(p, 2)
    b = regions.d1_bounds(src, threshold_structure(2, ThresholdParams(2, 1)))
    assert b.upper == pytest.approx(0.0, abs=1e-12)
    assert b.lower == 0.0


def test_single_dealer_bounds_order():
    rng = np.random.default_rng(11)
    for _ in range(20):
        src = random_small_source(rng, 3, 1)
        A = random_monotone(rng, 3)
        b = regions.d1_bounds(src, A)
        if A.unauthorized:
            assert b.lower_raw <= b.upper + 1e-9


def test_aon_inner_inside_outer():
    rng = np.random.default_rng(12)
    for _ in range(15):
        src = random_small_source(rng, 2, 2)
        inner, outer = regions.aon_inner(src), regions.aon_outer(src)
        for S in regions.nonempty_subsets(2):
            assert inner.bound[S] <= outer.bound[S] + 1e-9


def test_successive_region_contains_its_corners():
    src = random_source(np.random.default_rng(13), [2, 2], [2, 2])
    reg = regions.aon_successive_inner_d2(src)
    v = reg.values
    if reg.hypothesis_met:
        corner = [max(v[(1, 0)], 0), max(v[(2, 1)], 0)]
        assert reg.contains(corner) or min(corner) == 0
    rates = regions.aon_sum_rates_d2(src)
    assert rates.best >= rates.joint
    assert len(reg.rows()) == 5


def test_inner_sum_rates_vs_region_membership():
    src = random_source(np.random.default_rng(14), [2, 2], [2, 2], concentration=0.5)
    A = all_or_nothing(2)
    system = regions.inner_aux_system(src, A)
    sums = regions.inner_sum_rate_bounds(src, A)
    if sums is None:
        assert not system.consistent()
        return
    for S in (1, 2):
        R = np.zeros(2)
        R[S - 1] = sums.bound[S]
        assert regions.is_inner_member(system, R - np.where(R > 0, 1e-7, 0))
        assert not regions.is_inner_member(system, R + np.where(R > 0, 1e-5, 0))


def test_subset_region_helpers():
    reg = regions.SubsetBoundRegion(2, {1: 1.0, 2: -0.5, 3: 2.0})
    assert reg.effective().bound[2] == 0.0
    assert reg.facet_distance([1.0, 0.0]) == pytest.approx(0.0)
    assert reg.rows()[0] == {"subset": [1], "bound_bits": 1.0}
    with pytest.raises(ValidationError):
        regions.SubsetBoundRegion(2, {1: 1.0})


def test_closed_form_needs_two_dealers():
    src = pairwise_key_source(2, 1)
    with pytest.raises(ValidationError):
        regions.inner_d2_fm(src, all_or_nothing(2))


# --- set-function feasibility -------------------------------------------------------------


def test_sign_constraint_counterexample():
    # with x >= 0 the pointwise test is not enough: f = -1 forces x <= -1
    f = regions.SetFunction(1, np.array([0.0, -1.0]))
    g = regions.SetFunction(1, np.array([0.0, 5.0]))
    assert regions.pointwise_condition(f, g)
    assert not regions.submodular_feasible(f, g)
    assert not regions.lp_feasible(f, g)


def grid_feasible(f, g, top=8):
    """Integer search; exact for D <= 2 with integer data (interval constraint matrix)."""
    for x in itertools.product(range(top + 1), repeat=f.D):
        if all(-g(S) <= sum(x[d] for d in range(f.D) if S >> d & 1) <= f(S)
               for S in regions.nonempty_subsets(f.D)):
            return True
    return False


def integer_submodular(draw_vals, D):
    vals = np.array([0.0] + draw_vals)
    f = regions.SetFunction(D, vals)
    return f if regions.is_submodular(f) else None


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 2), st.lists(st.integers(-4, 4), min_size=6, max_size=6))
def test_feasibility_matches_grid_search(D, raw):
    k = (1 << D) - 1
    f = integer_submodular([float(v) for v in raw[:k]], D)
    g = integer_submodular([float(v) for v in raw[3:3 + k]], D)
    if f is None or g is None:
        return
    truth = grid_feasible(f, g)
    assert regions.submodular_feasible(f, g) == truth
    assert regions.lp_feasible(f, g) == truth


def test_non_submodular_falls_back_with_warning():
    f = regions.SetFunction(2, np.array([0.0, 1.0, 1.0, 5.0]))
    g = regions.SetFunction(2, np.array([0.0, 0.0, 0.0, 0.0]))
    assert not regions.is_submodular(f)
    with pytest.warns(regions.NotSubmodularWarning):
        assert regions.submodular_feasible(f, g)


def test_entropy_function_is_submodular():
    src = random_source(np.random.default_rng(15), [2], [2, 3, 2])
    f = regions.SetFunction.from_callable(3, lambda S: src.entropy(regions.Y(S)))
    assert regions.is_submodular(f)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_inner_never_exceeds_outer(seed):
    rng = np.random.default_rng(seed)
    L = int(rng.integers(1, 4))
    src = random_small_source(rng, L, 2)
    A = random_monotone(rng, L)
    system = regions.inner_aux_system(src, A)
    outer = regions.outer_general(src, A)
    for S in regions.nonempty_subsets(2):
        v = regions.inner_max_sum_rate(system, S)
        if v is None:
            break
        assert v <= outer.bound[S] + 1e-9
        assert math.isfinite(v) or not A.unauthorized
