from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from distsecret.access import (
    AccessStructure,
    ThresholdParams,
    all_or_nothing,
    mask_of,
    members,
    monotone_closure,
    parse_access,
    popcount,
    require_valid,
    threshold_structure,
    validate,
)
from distsecret.errors import ValidationError

from ._gen import random_monotone


def test_threshold_families():
    A = threshold_structure(4, ThresholdParams(3, 1))
    assert len(A.authorized) == 5
    assert len(A.unauthorized) == 5
    assert A.minimal_authorized() == [mask_of(c) for c in combinations(range(4), 3)]
    gaps = [d for d in validate(A) if d.kind == "gap"]
    assert len(gaps) == 6 and not [d for d in validate(A) if d.is_error]


def test_all_or_nothing():
    A = all_or_nothing(3)
    assert A.authorized == {0b111}
    assert A.maximal_unauthorized() == [0b011, 0b101, 0b110]


@pytest.mark.parametrize("t,z", [(0, 0), (5, 1), (2, 2), (2, -1)])
def test_threshold_param_checks(t, z):
    with pytest.raises(ValidationError):
        ThresholdParams(t, z).check(4)


def test_non_monotone_flagged():
    A = AccessStructure(3, {0b001}, {0b010})
    with pytest.raises(ValidationError):
        require_valid(A)
    assert {d.kind for d in validate(A)} >= {"monotonicity"}


def test_overlap_flagged():
    A = AccessStructure(2, {0b11}, {0b11, 0b01})
    assert any(d.kind == "overlap" for d in validate(A))


def test_parse():
    assert parse_access("thr:4:3:1") == threshold_structure(4, ThresholdParams(3, 1))
    assert parse_access("aon", L=3) == all_or_nothing(3)
    A = parse_access("min:1,2;3", L=3)
    assert A.minimal_authorized() == [0b100, 0b011]
    with pytest.raises(ValidationError):
        parse_access("thr:4:3", L=4)
    with pytest.raises(ValidationError):
        parse_access("thr:4:3:1", L=5)
    with pytest.raises(ValidationError):
        parse_access("bogus")


def test_mask_helpers():
    assert members(mask_of([0, 2, 5])) == (0, 2, 5)
    assert popcount(0b101101) == 4


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32))
def test_closure_is_monotone_and_partitions(L, seed):
    A = random_monotone(np.random.default_rng(seed), L)
    for a in A.authorized:
        for i in range(L):
            assert a | 1 << i in A.authorized
    assert not A.authorized & A.unauthorized
    assert not [d for d in validate(A) if d.is_error]


def test_closure_rejects_out_of_range():
    with pytest.raises(ValidationError):
        monotone_closure([[0, 3]], 3)
