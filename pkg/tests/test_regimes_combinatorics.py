import pytest
from hypothesis import given
from hypothesis import strategies as st

from gwsmall import RegimeSpec, bell_at_ones, stirling2
from oracles import count_partitions, falling


def test_stirling_falling_factorial_identity():
    assert sum(stirling2(4, k) * falling(7, k) for k in range(1, 5)) == 2401


@pytest.mark.parametrize("J", range(1, 9))
def test_stirling_counts_set_partitions(J):
    for k in range(1, J + 1):
        assert stirling2(J, k) == count_partitions(J, k)


def test_stirling_equals_bell_at_ones_up_to_30():
    for J in range(1, 31):
        for k in range(1, J + 1):
            assert stirling2(J, k) == bell_at_ones(J, k)


@pytest.mark.parametrize("J,k", [(31, 2), (5, 0), (3, 4)])
def test_combinatorics_range(J, k):
    with pytest.raises(OverflowError):
        stirling2(J, k)
    with pytest.raises(OverflowError):
        bell_at_ones(J, k)


def test_observation_times_at_400():
    n = 400
    assert RegimeSpec(1).m(n) == 20
    assert RegimeSpec(2, theta=0.5).m(n) == 200
    assert RegimeSpec(3).m(n) == 400 - 90
    assert RegimeSpec(4, y=1.0).m(n) == 380
    assert RegimeSpec(4, y=0.5).m(n) == 390
    assert RegimeSpec(5).m(n) == 400
    assert RegimeSpec(5, a_chi=0.25).m(n) == 400 - 5
    assert RegimeSpec(1).phi(n) == 20 and RegimeSpec(1).psi(n) == 90


def test_exact_powers_are_not_rounded_up():
    for k in (10, 20, 100, 1000):
        assert RegimeSpec(1).phi(k * k) == k


@pytest.mark.parametrize("kw", [dict(regime=6), dict(regime=2, theta=0.0), dict(regime=2, theta=1.0),
                                dict(regime=4, y=0.0), dict(regime=1, a_phi=1.0),
                                dict(regime=3, a_psi=0.4), dict(regime=5, a_chi=0.6)])
def test_invalid_specs(kw):
    with pytest.raises(ValueError):
        RegimeSpec(**kw)


@given(n=st.integers(10**4, 10**9), r=st.sampled_from([3, 5]))
def test_scale_orderings(n, r):
    s = RegimeSpec(r, a_chi=0.2 if r == 5 else None)
    phi = s.phi(n)
    assert phi < n
    if r == 3:
        assert phi < s.psi(n) < n
        assert s.scale_index(n) == s.psi(n)
    else:
        assert 0 <= s.chi(n) < phi
        assert s.scale_index(n) == phi


def test_labels():
    assert RegimeSpec(2, theta=0.5).label() == "regime2[theta=0.5]"
    assert RegimeSpec(4, y=2.0).label() == "regime4[y=2.0]"
    assert RegimeSpec(3).label() == "regime3"
