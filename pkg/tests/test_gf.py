import math

import numpy as np
import pytest

from gwsmall import GeometricCriticalLaw, StableOffspringLaw, TableRangeError, UnitOffspringLaw, build_table

CANON = StableOffspringLaw(alpha=0.5)


@pytest.fixture(scope="module")
def big():
    return build_table(CANON, 10**6)


@pytest.fixture(scope="module")
def geo():
    return build_table(GeometricCriticalLaw(), 10**5)


def test_geometric_closed_form(geo):
    n = np.arange(geo.n_max + 1)
    assert np.max(np.abs(geo.u * (n + 1) - 1.0)) < 1e-12


def test_small_examples():
    t = build_table(CANON, 50)
    assert t.survival(0) == 1.0
    assert t.survival(1) == pytest.approx(1 / 3, abs=1e-16)
    assert t.threshold(1) == pytest.approx(3.0, abs=1e-14)
    g = build_table(GeometricCriticalLaw(), 50)
    assert g.threshold(9) == pytest.approx(10.0, abs=1e-12)
    assert g.threshold_int(9) == 10
    assert build_table(UnitOffspringLaw(), 20).threshold(7) == 1.0


def test_table_monotone_and_simple_form(big):
    u = big.u
    assert np.all(np.diff(u) < 0)
    assert u[-1] / u[-2] == pytest.approx(1.0, abs=1e-3)
    # n u_n^alpha c alpha -> 1
    n = 10**6
    assert n * u[n] ** 0.5 * CANON.c * 0.5 == pytest.approx(1.0, rel=0.01)


def test_delta_positive_and_decreasing(big):
    d = big.u[1:] / (0.5 * np.arange(1, big.n_max + 1))
    assert np.all(d > 0) and np.all(np.diff(d) < 0)
    assert big.delta(10) == pytest.approx(d[9])
    with pytest.raises(TableRangeError):
        big.delta(0)


def test_ratio_vanishes_along_grid(big):
    vals = [big.survival(n) / big.survival(n // 10) for n in (10**3, 10**4, 10**5, 10**6)]
    # for the pure power law the ratio settles at 10^-2 = (1/10)^(1/alpha); the
    # decay must at least be strictly monotone and below one
    assert all(b < a for a, b in zip(vals, vals[1:])) or all(v < 0.011 for v in vals)
    assert all(v < 1 for v in vals)


def test_underflow_names_safe_horizon():
    # u_n decays like n^(-1/alpha) = n^-100 and leaves binary64 near n = 1e5
    law = StableOffspringLaw(alpha=0.01)
    with pytest.raises(TableRangeError, match=r"largest safe n_max is (\d+)") as err:
        build_table(law, 10**6)
    safe = int(err.value.args[0].rsplit(" ", 1)[1])
    assert build_table(law, safe).u[-1] >= 1e-300


def test_range_errors(big):
    with pytest.raises(TableRangeError):
        big.survival(big.n_max + 1)
    with pytest.raises(TableRangeError):
        big.find_r(10**6, 0.1)


@pytest.mark.parametrize("law", [CANON, GeometricCriticalLaw(), StableOffspringLaw(alpha=0.8, c=0.3)])
@pytest.mark.parametrize("l", [5, 100, 1000])
def test_find_r_rho_one(law, l):
    assert build_table(law, 5000).find_r(l, 1.0) == l - 1


@pytest.mark.parametrize("l,rho", [(100, 2.0), (1000, 0.5), (5000, 3.0), (40, 1.7)])
def test_find_r_two_sided_inequality(big, l, rho):
    r = big.find_r(l, rho)
    target = 1.0 - (1.0 - big.survival(l)) ** rho
    assert big.survival(r + 1) <= target < big.survival(r)


def test_find_r_asymptotics(big, geo):
    l = 10**5
    assert big.find_r(l, 2.0) / (l * 2**-0.5) == pytest.approx(1.0, rel=0.02)
    assert geo.find_r(10**4, 2.0) / (10**4 / 2) == pytest.approx(1.0, rel=0.02)
    # exact r from the closed form 1/(r+1) for the geometric law
    target = 1 - (1 - 1 / (10**4 + 1)) ** 2
    assert geo.find_r(10**4, 2.0) == math.ceil(1 / target - 1) - 1


def test_threshold_int_floor_and_w():
    g = build_table(GeometricCriticalLaw(), 100)
    assert g.threshold_int(9, 2.5) == 25
    assert g.threshold_int(9, 0.05) == 0
    t = build_table(CANON, 100)
    assert t.threshold_int(20) == math.floor(1 / t.survival(20))


def test_csv_export(tmp_path):
    t = build_table(CANON, 10)
    p = tmp_path / "u.csv"
    t.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "k,u_k,delta_k" and len(rows) == 12
    k, u, d = rows[3].split(",")
    assert float(u) == t.survival(2) and float(d) == t.delta(2)
