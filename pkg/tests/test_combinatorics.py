import itertools
import math

import pytest
from hypothesis import given, settings, strategies as st

from gefzeros.combinatorics import (SeparationInstance, cyclic_distance, select_separated,
                                    verify_selection)


def _brute(inst, J):
    # direct restatement of both conditions
    N, Q, m = inst.N, inst.Q, inst.m
    for j, k in itertools.combinations(J, 2):
        d = min(abs(j - k), N - abs(j - k))
        if d < Q * (math.sqrt(m[j]) + math.sqrt(m[k])) - 1e-9:
            return False
    return sum(m) <= 5 * Q * sum(m[j] ** 1.5 for j in J) + 1e-9


def test_single_peak():
    inst = SeparationInstance((4,) + (0,) * 9, 1)
    res = select_separated(inst)
    # index 0 retires 1,2,3 and 7,8,9; the zero-mass indices 4,5,6 are
    # claimed afterwards without affecting either condition
    assert res.J_prime == (0, 4, 5, 6)
    assert res.certificate == {"separation_ok": True, "mass_ratio": 0.1}
    assert verify_selection(inst, (0,))


def test_all_zero():
    inst = SeparationInstance((0,) * 7, 2)
    res = select_separated(inst)
    assert res.J_prime == tuple(range(7))
    assert res.separation_ok and res.mass_ratio == 0.0


def test_verify_rejects():
    inst = SeparationInstance((9, 9) + (0,) * 10, 1)
    assert not verify_selection(inst, (0, 1))
    assert not verify_selection(inst, ())
    assert not verify_selection(inst, (0, 0))
    assert verify_selection(inst, select_separated(inst).J_prime)


def test_cyclic_distance():
    assert cyclic_distance(0, 9, 10) == 1
    assert cyclic_distance(2, 7, 10) == 5
    assert cyclic_distance(3, 3, 10) == 0


def test_invalid_instances():
    with pytest.raises(ValueError):
        SeparationInstance((), 1)
    with pytest.raises(ValueError):
        SeparationInstance((1, -1), 1)
    with pytest.raises(ValueError):
        SeparationInstance((1,), 0.5)


def test_tie_break_smallest_index():
    inst = SeparationInstance((0, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 5, 0), 1)
    assert select_separated(inst).J_prime[0] == 1


@settings(max_examples=400, deadline=None)
@given(st.lists(st.integers(0, 32), min_size=1, max_size=64), st.sampled_from([1, 2, 3]))
def test_certificate_property(m, Q):
    inst = SeparationInstance(tuple(m), Q)
    res = select_separated(inst)
    assert res.separation_ok and res.mass_ratio <= 1 + 1e-12
    assert verify_selection(inst, res.J_prime)
    assert _brute(inst, res.J_prime)
    assert select_separated(SeparationInstance(tuple(m), Q)) == res


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 16), min_size=1, max_size=10), st.sampled_from([1, 2]),
       st.data())
def test_verify_matches_brute_force(m, Q, data):
    inst = SeparationInstance(tuple(m), Q)
    J = data.draw(st.sets(st.integers(0, len(m) - 1)))
    assert verify_selection(inst, sorted(J)) == _brute(inst, sorted(J))
