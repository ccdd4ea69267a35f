import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwsmall import GeometricCriticalLaw, StableOffspringLaw, UnitOffspringLaw, parse_law, sample
from oracles import stable_pmf_mp

CANON = StableOffspringLaw(alpha=0.5)


def test_canonical_pmf_values():
    assert CANON.c == pytest.approx(2 / 3, abs=1e-15)
    assert CANON.pmf(0) == pytest.approx(2 / 3, abs=1e-15)
    assert CANON.pmf(1) == 0.0
    assert CANON.pmf(2) == pytest.approx(0.25, abs=1e-15)
    assert GeometricCriticalLaw().pmf(3) == 1 / 16


def test_pmf_matches_binomial_series():
    ref = stable_pmf_mp(0.5, 2 / 3, 200)
    got = CANON.pmf_array(200)
    for k in range(201):
        # c = 2/3 is not exact in binary, so the oracle's p_1 is ~1e-16 instead of 0
        assert abs(got[k] - float(ref[k])) <= 1e-14 * abs(float(ref[k])) + 1e-16


@pytest.mark.parametrize("alpha,c", [(0.3, 0.5), (0.5, 2 / 3), (0.8, 0.4), (1.0, 0.5)])
def test_pmf_sums_to_one_and_tail_consistent(alpha, c):
    law = StableOffspringLaw(alpha=alpha, c=c)
    K = 2000
    p = law.pmf_array(K)
    t = law.tail_array(K)
    assert np.all(p >= 0)
    # P(xi > k) = 1 - sum_{j<=k} p_j, compared where cancellation is harmless
    assert np.allclose(t[:50], 1.0 - np.cumsum(p)[:50], rtol=0, atol=1e-14)
    d = t[:-1] - t[1:]
    # tail(k) - tail(k+1) = pmf(k+1): 1e-14 on the scale of the tails being differenced,
    # and on the pmf itself while the two tails are not yet nearly equal
    assert np.all(np.abs(d - p[1:]) <= 1e-14 * t[:-1])
    pos = p[1:61] > 0
    assert np.all((np.abs(d - p[1:])[:60] <= 1e-14 * p[1:61])[pos])
    assert p.sum() + t[-1] == pytest.approx(1.0, abs=1e-13)


def test_tail_against_partial_sums_high_precision():
    with mp.workdps(40):
        a, c = mp.mpf(1) / 2, mp.mpf(2) / 3
        for k in (1000, 10_000):
            # coefficient of s^k in -c (1 - s)^a, the generating function of the tails
            ref = -c * mp.binomial(a, k) * (-1) ** k
            direct = 1 - mp.fsum(stable_pmf_mp(0.5, c, k, dps=40))
            assert float(ref) == pytest.approx(float(direct), rel=1e-20)
            assert CANON.tail(k) == pytest.approx(float(ref), rel=1e-11)


def test_tail_asymptotic_trend():
    # P(xi > k) ~ c alpha k^(-1-alpha) / Gamma(1 - alpha)
    ratios = [CANON.tail(k) / (CANON.c * 0.5 * k**-1.5 / math.gamma(0.5)) for k in (10**2, 10**3, 10**4, 10**5)]
    gaps = [abs(r - 1) for r in ratios]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-4


def test_unit_and_geometric_basics():
    u = UnitOffspringLaw()
    assert u.pmf(1) == 1.0 and u.tail(1) == 0.0 and u.tail(0) == 1.0
    g = GeometricCriticalLaw()
    assert g.pgf(0.3) == pytest.approx(1 / 1.7)
    assert sum(k * g.pmf(k) for k in range(200)) == pytest.approx(1.0)
    assert sum(k * (k - 1) * g.pmf(k) for k in range(400)) == pytest.approx(2.0)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.05, 1.0), frac=st.floats(0.05, 1.0), s=st.floats(0.0, 1.0))
def test_pgf_matches_pmf_series(alpha, frac, s):
    law = StableOffspringLaw(alpha=alpha, c=frac / (1 + alpha))
    K = 3000
    series = float(np.dot(law.pmf_array(K), s ** np.arange(K + 1))) + law.tail(K) * s ** (K + 1)
    # the remainder above K is at most tail(K) in absolute size
    assert abs(series - law.pgf(s)) <= law.tail(K) + 1e-12
    assert law.pgf(1.0) == 1.0


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(0.05, 1.0), frac=st.floats(0.05, 1.0))
def test_law_is_critical(alpha, frac):
    law = StableOffspringLaw(alpha=alpha, c=frac / (1 + alpha))
    # f'(1) = 1: the one-sided difference quotient approaches 1 at rate h^alpha
    with mp.workdps(120):
        h = mp.mpf(10) ** -40
        a, c = mp.mpf(law.alpha), mp.mpf(law.c)
        f = lambda s: s + c * (1 - s) ** (1 + a)
        assert abs((f(1) - f(1 - h)) / h - 1) <= 1.01 * c * h**a


@pytest.mark.parametrize("bad", [dict(alpha=0.0), dict(alpha=1.2), dict(alpha=0.5, c=0.7), dict(alpha=0.5, c=0.0)])
def test_parameter_validation(bad):
    with pytest.raises(ValueError):
        StableOffspringLaw(**bad)


def test_parse_law_round_trip():
    for text in ("stable(alpha=0.5)", "stable(alpha=0.3, c=0.25)", "geometric", "unit"):
        law = parse_law(text)
        assert parse_law(law.spec_string()) == law
    with pytest.raises(ValueError):
        parse_law("poisson(1)")


def test_sampler_unit_law_always_one():
    assert np.all(sample(UnitOffspringLaw(), 10_000, seed=3) == 1)


def test_sampler_cells_and_far_tail():
    N = 10**7
    x = sample(CANON, N, seed=11)
    counts = np.bincount(np.minimum(x, 21), minlength=22)
    p = CANON.pmf_array(20)
    for k in range(21):
        sd = math.sqrt(N * p[k] * (1 - p[k]))
        assert abs(counts[k] - N * p[k]) <= 4 * sd + 1e-9, k
    q = CANON.tail(1000)
    hits = int((x > 1000).sum())
    assert abs(hits - N * q) <= 4 * math.sqrt(N * q * (1 - q))
    # median of means of 100 groups is a robust check of criticality
    mom = np.median(x.reshape(100, -1).mean(axis=1))
    assert 0.9 < mom < 1.05


def test_sampler_deep_tail_exact_walk():
    # cutoff 16 forces most of the far tail through the exact tail walk
    law = StableOffspringLaw(alpha=0.5, table_cutoff=16)
    N = 2 * 10**6
    x = sample(law, N, seed=5)
    for k in (15, 16, 40, 300):
        q = law.tail(k)
        assert abs((x > k).sum() - N * q) <= 4 * math.sqrt(N * q * (1 - q)), k
