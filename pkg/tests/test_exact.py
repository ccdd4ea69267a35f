import math

import mpmath as mp
import numpy as np
import pytest
from scipy.stats import binom

from gwsmall import FiniteHorizon, GeometricCriticalLaw, StableOffspringLaw, UnitOffspringLaw, build_table
from oracles import distribution_recursion, transition_matrix

GEO = GeometricCriticalLaw()
CANON = StableOffspringLaw(alpha=0.5)
SIZE = 400


@pytest.fixture(scope="module")
def geo_oracle():
    pmf = np.array([GEO.pmf(k) for k in range(SIZE)])
    return transition_matrix(pmf, SIZE)


def test_iterates_match_high_precision_taylor():
    n, T = 4, 6
    fh = FiniteHorizon(CANON, n, T)
    with mp.workdps(60):
        a, c = mp.mpf(1) / 2, mp.mpf(2) / 3

        def fn(s):
            for _ in range(n):
                s = s + c * (1 - s) ** (1 + a)
            return s

        ref = mp.taylor(fn, 0, T)
    got = fh.f_series(n)
    for t in range(T + 1):
        assert got[t] == pytest.approx(float(ref[t]), rel=1e-11, abs=1e-300)


def test_geometric_iterates_closed_form():
    # f_n(s) = (n - (n-1)s) / (n + 1 - n s)
    n, T = 7, 12
    got = FiniteHorizon(GEO, n, T).f_series(n)
    ref = [n / (n + 1)] + [(1 / (n + 1) ** 2) * (n / (n + 1)) ** (t - 1) for t in range(1, T + 1)]
    assert np.allclose(got, ref, rtol=1e-13, atol=0)


def test_event_probability_against_distribution_recursion(geo_oracle):
    n, T = 20, 10
    dist = np.zeros(SIZE)
    dist[1] = 1.0
    for _ in range(n):
        dist = dist @ geo_oracle
    ref = dist[1 : T + 1].sum()
    assert FiniteHorizon(GEO, n, T).event_probability() == pytest.approx(ref, rel=1e-9)


def test_event_weights_from_later_generation(geo_oracle):
    n, T, k = 20, 10, 6
    fh = FiniteHorizon(GEO, n, T)
    zs = [1, 2, 5, 17]
    P = np.linalg.matrix_power(geo_oracle, n - k)
    got = fh.event_weights(zs, k)
    for z, g in zip(zs, got):
        assert g == pytest.approx(P[z, 1 : T + 1].sum(), rel=1e-9)


def test_conditional_lst_against_joint_law(geo_oracle):
    n, T, m, lam, scale = 20, 10, 8, 1.3, 0.2
    Pm = np.linalg.matrix_power(geo_oracle, m)[1]
    Pnm = np.linalg.matrix_power(geo_oracle, n - m)
    hit = Pnm[:, 1 : T + 1].sum(axis=1)
    i = np.arange(SIZE)
    num = np.sum(Pm * np.exp(-lam * scale * i) * hit)
    den = np.sum(Pm * hit)
    assert FiniteHorizon(GEO, n, T).conditional_lst(m, scale, lam) == pytest.approx(num / den, rel=1e-9)


def test_reduced_pmf_against_thinning(geo_oracle):
    # given Z(m) = i, the lines with descendants at n are Binomial(i, u_{n-m}); each
    # such line contributes an independent copy of Z(n-m) conditioned to survive
    n, T, m = 16, 8, 10
    table = build_table(GEO, n)
    u = table.survival(n - m)
    Pm = np.linalg.matrix_power(geo_oracle, m)[1]
    cond = np.linalg.matrix_power(geo_oracle, n - m)[1].copy()
    cond[0] = 0.0
    cond /= u
    conv = [np.zeros(SIZE)]
    conv[0][0] = 1.0
    for j in range(1, T + 1):
        conv.append(np.convolve(conv[-1], cond)[:SIZE])
    joint = np.zeros(T + 1)
    for j in range(1, T + 1):
        pj = np.sum(Pm * binom.pmf(j, np.arange(SIZE), u))
        joint[j] = pj * conv[j][1 : T + 1].sum()
    ref = joint / joint.sum()
    got = FiniteHorizon(GEO, n, T).reduced_pmf(m)
    assert got[0] == 0.0
    assert np.allclose(got, ref, rtol=1e-8, atol=1e-14)


def test_reduced_weights_sum_to_event_weights():
    fh = FiniteHorizon(CANON, 60, 9)
    zs = np.array([1, 3, 8, 40])
    W = fh.reduced_weights(zs, 45, k=5)
    assert np.allclose(W.sum(axis=1), fh.event_weights(zs, 5), rtol=1e-11)
    assert np.all(W >= -1e-15)


def test_mrca_identity_and_monotonicity():
    # P(d(n) <= n - m | H) = P(Z(m, n) = 1 | H); Z(m, n) grows with m, so this falls
    fh = FiniteHorizon(CANON, 40, 6)
    p1 = [fh.reduced_pmf(m)[1] for m in range(0, 40)]
    assert all(b <= a + 1e-12 for a, b in zip(p1, p1[1:]))
    assert p1[-1] < p1[0]
    assert p1[0] == pytest.approx(1.0, abs=1e-12)


def test_lst_at_zero_is_one_and_decreasing():
    fh = FiniteHorizon(CANON, 50, 7)
    assert fh.conditional_lst(20, 0.3, 0.0) == pytest.approx(1.0, abs=1e-14)
    vals = [fh.conditional_lst(20, 0.3, lam) for lam in (0.5, 1.0, 2.0, 4.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_unit_law_is_deterministic():
    fh = FiniteHorizon(UnitOffspringLaw(), 10, 3)
    assert fh.event_probability() == 1.0
    assert fh.reduced_pmf(4)[1] == pytest.approx(1.0)
    assert fh.conditional_lst(5, 0.5, 2.0) == pytest.approx(math.exp(-1.0))


def test_distribution_oracle_sanity():
    pmf = np.array([GEO.pmf(k) for k in range(SIZE)])
    d = distribution_recursion(pmf, 5, SIZE)
    assert d[5, 0] == pytest.approx(5 / 6, rel=1e-12)
    assert np.dot(d[5], np.arange(SIZE)) == pytest.approx(1.0, rel=1e-9)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        FiniteHorizon(CANON, 10, 0)
    fh = FiniteHorizon(CANON, 10, 3)
    with pytest.raises(ValueError):
        fh.lst_series(11, 1.0, 1.0)
    with pytest.raises(ValueError):
        fh.reduced_parts(10)
