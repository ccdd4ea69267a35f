import math

import numpy as np
import pytest
from scipy import stats

from gwsmall import (
    FiniteHorizon,
    GeometricCriticalLaw,
    StableOffspringLaw,
    UnitOffspringLaw,
    sample,
    simulate_reduced,
    simulate_trajectory,
)
from gwsmall.rng import root_key, stream_uniforms
from gwsmall.simulate import final_sizes

CANON = StableOffspringLaw(alpha=0.5)


def test_unit_law_line():
    tr = simulate_trajectory(UnitOffspringLaw(), 5, seed=1)
    assert tr.z.tolist() == [1] * 6 and not tr.overflow and tr.absorbed_at is None
    tr, red = simulate_reduced(UnitOffspringLaw(), 5, seed=1)
    assert red.counts.tolist() == [1] * 6
    # every level has one individual, so the last level below n with count 1 is n - 1
    assert red.mrca_distance == 1


def test_trajectories_absorb_at_zero():
    for trial in range(200):
        tr = simulate_trajectory(CANON, 30, seed=2, trial=trial)
        assert tr.z[0] == 1 and np.all(tr.z >= 0)
        k = tr.absorbed_at
        if k is not None:
            assert np.all(tr.z[k:] == 0)


def test_first_generation_extinction():
    N = 10**6
    x = sample(CANON, N, seed=9)
    p = CANON.c
    assert abs((x == 0).mean() - p) <= 4 * math.sqrt(p * (1 - p) / N)


def test_second_generation_extinction():
    N = 10**6
    z = final_sizes(CANON, 2, N, seed=4)
    p = 2 / 3 + (2 / 3) * (1 / 3) ** 1.5
    assert p == pytest.approx(0.794967, abs=1e-6)
    assert abs((z == 0).mean() - p) <= 4 * math.sqrt(p * (1 - p) / N)


def test_second_generation_chi_square():
    N, K = 10**6, 30
    z = final_sizes(CANON, 2, N, seed=21)
    p = FiniteHorizon(CANON, 2, K).f_series(2)
    expected = np.append(p, 1.0 - p.sum()) * N
    observed = np.bincount(np.minimum(z, K + 1), minlength=K + 2)
    # pool sparse cells into the tail so every expectation is at least 5
    keep = expected >= 5
    keep[-1] = True
    obs = np.append(observed[keep][:-1], observed[~keep].sum() + observed[-1])
    exp = np.append(expected[keep][:-1], expected[~keep].sum() + expected[-1])
    res = stats.chisquare(obs, exp)
    assert res.pvalue > 1e-4


def test_geometric_survival_frequency():
    N, n = 4 * 10**5, 20
    z = final_sizes(GeometricCriticalLaw(), n, N, seed=8)
    p = 1 / (n + 1)
    assert abs((z > 0).mean() - p) <= 4 * math.sqrt(p * (1 - p) / N)


def test_reduced_process_invariants():
    n = 15
    seen = 0
    for trial in range(3000):
        tr, red = simulate_reduced(CANON, n, seed=6, trial=trial)
        assert not tr.overflow
        r, z = red.counts, tr.z
        assert r[n] == z[n]
        assert np.all(r <= z)
        if z[n] == 0:
            assert red.mrca_distance is None and np.all(r == 0)
            continue
        seen += 1
        assert r[0] == 1 and np.all(np.diff(r) >= 0)
        d = red.mrca_distance
        assert 1 <= d <= n
        beta = n - d
        assert r[beta] == 1 and np.all(r[beta + 1 : n] != 1)
    assert seen > 50


def test_genealogy_and_forward_agree_in_law():
    n, N = 6, 30_000
    fwd = final_sizes(CANON, n, N, seed=12)
    gen = np.array([simulate_reduced(CANON, n, seed=13, trial=t)[0].z[n] for t in range(N)])
    for k in (0, 1, 2, 3):
        a, b = (fwd == k).mean(), (gen == k).mean()
        se = math.sqrt(a * (1 - a) / N + b * (1 - b) / N)
        assert abs(a - b) <= 4 * se + 1e-12, k


def test_thread_count_does_not_change_results():
    a = final_sizes(CANON, 40, 100_000, seed=5, threads=1)
    b = final_sizes(CANON, 40, 100_000, seed=5, threads=4)
    assert np.array_equal(a, b)


def test_streams_are_indexed_by_trial():
    assert np.array_equal(sample(CANON, 10, seed=3, start=5), sample(CANON, 15, seed=3)[5:])
    assert not np.array_equal(sample(CANON, 100, seed=3), sample(CANON, 100, seed=4))
    t1 = simulate_trajectory(CANON, 50, seed=3, trial=77)
    t2 = simulate_trajectory(CANON, 50, seed=3, trial=77)
    assert np.array_equal(t1.z, t2.z)


def test_uniform_streams():
    key = root_key(123)
    u = np.concatenate([stream_uniforms(key, t, 64) for t in range(2000)])
    assert np.all((u >= 0) & (u < 1))
    assert stats.kstest(u, "uniform").pvalue > 1e-4
    first = np.array([stream_uniforms(key, t, 1)[0] for t in range(20_000)])
    assert stats.kstest(first, "uniform").pvalue > 1e-4
    assert root_key(2**64 + 5) == root_key(5)


def test_negative_horizon_rejected():
    with pytest.raises(ValueError):
        simulate_trajectory(CANON, -1)
