"""Compiled Galton-Watson kernels (nogil, one counter-based stream per trial)."""
import numba as nb
import numpy as np

from .offspring import GEOMETRIC, STABLE
from .rng import trial_state, uniform, uniform_open

OVERFLOW = np.int64(1) << np.int64(62)

# per-block status counters
ST_TRIALS, ST_OVERFLOW, ST_PRUNED, ST_DRAWS = 0, 1, 2, 3


@nb.njit(inline="always")
def _tail_ratio(code, alpha, k):
    # P(xi > k + 1) / P(xi > k)
    if code == STABLE:
        return (k - alpha) / (k + 1.0)
    if code == GEOMETRIC:
        return 0.5
    return 0.0


@nb.njit(inline="always")
def draw(st, prob, alias, tail_start, code, alpha):
    """One exact offspring draw; returns -1 if the value exceeds the overflow guard."""
    K = prob.shape[0] - 1
    i = int(uniform(st) * (K + 1))
    if i > K:
        i = K
    cell = i if uniform(st) < prob[i] else alias[i]
    if cell < K:
        return np.int64(cell)
    # xi >= K: smallest k >= K with P(xi > k) <= V, V uniform on (0, P(xi >= K)]
    v = uniform_open(st) * tail_start
    k = K
    t = tail_start * _tail_ratio(code, alpha, K - 1)
    while t > v:
        t *= _tail_ratio(code, alpha, k)
        k += 1
        if k >= OVERFLOW:
            return np.int64(-1)
    return np.int64(k)


@nb.njit(cache=True, nogil=True)
def sample_block(key, t0, count, prob, alias, tail_start, code, alpha):
    """``count`` single draws, the i-th from trial stream t0 + i."""
    out = np.empty(count, dtype=np.int64)
    st = np.empty(1, dtype=np.uint64)
    for i in range(count):
        st[0] = trial_state(key, t0 + i)
        out[i] = draw(st, prob, alias, tail_start, code, alpha)
    return out


@nb.njit(cache=True, nogil=True)
def trajectory(key, trial, n, prob, alias, tail_start, code, alpha):
    """Z(0..n) of one trial; returns (z, overflow_flag)."""
    z = np.zeros(n + 1, dtype=np.int64)
    st = np.empty(1, dtype=np.uint64)
    st[0] = trial_state(key, trial)
    z[0] = 1
    for g in range(n):
        cur = z[g]
        if cur == 0:
            break
        nxt = np.int64(0)
        for _ in range(cur):
            x = draw(st, prob, alias, tail_start, code, alpha)
            if x < 0 or nxt > OVERFLOW - x:
                return z, True
            nxt += x
        z[g + 1] = nxt
    return z, False


@nb.njit(cache=True, nogil=True)
def forward_block(key, t0, count, n, prob, alias, tail_start, code, alpha,
                  checkpoints, zcap, t_store):
    """Forward-simulate trials t0..t0+count-1 to generation n.

    Trials with 0 < Z(n) <= t_store are kept; for each kept trial the row
    ``[trial, Z(checkpoints[0]), ..., Z(n)]`` is written to the output.
    A trial with Z(g) > zcap[g] is stopped early and counted as pruned
    (callers choose zcap so that such trials cannot end in the kept range).
    """
    nc = checkpoints.shape[0]
    rows = np.zeros((count, nc + 2), dtype=np.int64)
    stats = np.zeros(4, dtype=np.int64)
    st = np.empty(1, dtype=np.uint64)
    zbuf = np.zeros(n + 1, dtype=np.int64)
    kept = 0
    for i in range(count):
        trial = t0 + i
        st[0] = trial_state(key, trial)
        stats[ST_TRIALS] += 1
        zbuf[:] = 0
        zbuf[0] = 1
        status = 0
        for g in range(n):
            cur = zbuf[g]
            if cur == 0:
                break
            nxt = np.int64(0)
            for _ in range(cur):
                x = draw(st, prob, alias, tail_start, code, alpha)
                if x < 0 or nxt > OVERFLOW - x:
                    status = 1
                    break
                nxt += x
            stats[ST_DRAWS] += cur
            if status:
                break
            zbuf[g + 1] = nxt
            if nxt > zcap[g + 1]:
                status = 2
                break
        if status == 1:
            stats[ST_OVERFLOW] += 1
            continue
        if status == 2:
            stats[ST_PRUNED] += 1
            continue
        zn = zbuf[n]
        if 0 < zn <= t_store:
            rows[kept, 0] = trial
            for c in range(nc):
                rows[kept, 1 + c] = zbuf[checkpoints[c]]
            rows[kept, nc + 1] = zn
            kept += 1
    return rows[:kept].copy(), stats


@nb.njit(cache=True, nogil=True)
def generation_block(key, t0, count, k, prob, alias, tail_start, code, alpha):
    """Z(k) for every trial in the block (-1 marks overflow)."""
    out = np.zeros(count, dtype=np.int64)
    st = np.empty(1, dtype=np.uint64)
    for i in range(count):
        st[0] = trial_state(key, t0 + i)
        cur = np.int64(1)
        for g in range(k):
            if cur == 0:
                break
            nxt = np.int64(0)
            for _ in range(cur):
                x = draw(st, prob, alias, tail_start, code, alpha)
                if x < 0 or nxt > OVERFLOW - x:
                    nxt = -1
                    break
                nxt += x
            cur = nxt
            if cur < 0:
                break
        out[i] = cur
    return out


@nb.njit(cache=True, nogil=True)
def genealogy(st, n, prob, alias, tail_start, code, alpha, level, reduced):
    """Depth-first realisation of one family tree to depth n.

    Fills ``level[d] = Z(d)`` and ``reduced[d] = Z(d, n)``; returns False on overflow.
    The explicit stack holds, per depth, the number of children still to visit
    and whether the current node already has a descendant at depth n.
    """
    level[:] = 0
    reduced[:] = 0
    level[0] = 1
    if n == 0:
        reduced[0] = 1
        return True
    remaining = np.zeros(n, dtype=np.int64)
    alive = np.zeros(n, dtype=np.bool_)
    x = draw(st, prob, alias, tail_start, code, alpha)
    if x < 0:
        return False
    remaining[0] = x
    d = 0
    while d >= 0:
        if remaining[d] > 0:
            remaining[d] -= 1
            c = d + 1
            level[c] += 1
            if level[c] >= OVERFLOW:
                return False
            if c == n:
                alive[d] = True
                reduced[n] += 1
            else:
                x = draw(st, prob, alias, tail_start, code, alpha)
                if x < 0:
                    return False
                remaining[c] = x
                alive[c] = False
                d = c
        else:
            if alive[d]:
                reduced[d] += 1
                if d > 0:
                    alive[d - 1] = True
            d -= 1
    return True


@nb.njit(cache=True, nogil=True)
def genealogy_one(key, trial, n, prob, alias, tail_start, code, alpha):
    st = np.empty(1, dtype=np.uint64)
    st[0] = trial_state(key, trial)
    level = np.zeros(n + 1, dtype=np.int64)
    reduced = np.zeros(n + 1, dtype=np.int64)
    ok = genealogy(st, n, prob, alias, tail_start, code, alpha, level, reduced)
    return level, reduced, ok


@nb.njit(cache=True, nogil=True)
def genealogy_block(key, t0, count, n, prob, alias, tail_start, code, alpha, checkpoints, t_store):
    """Genealogy trials; kept rows are
    ``[trial, Z(n), d(n), Z(c_0), ..., Z(c_q), Z(c_0, n), ..., Z(c_q, n)]``
    for trials with 0 < Z(n) <= t_store."""
    nc = checkpoints.shape[0]
    rows = np.zeros((count, 3 + 2 * nc), dtype=np.int64)
    stats = np.zeros(4, dtype=np.int64)
    st = np.empty(1, dtype=np.uint64)
    level = np.zeros(n + 1, dtype=np.int64)
    reduced = np.zeros(n + 1, dtype=np.int64)
    kept = 0
    for i in range(count):
        trial = t0 + i
        st[0] = trial_state(key, trial)
        stats[ST_TRIALS] += 1
        ok = genealogy(st, n, prob, alias, tail_start, code, alpha, level, reduced)
        if not ok:
            stats[ST_OVERFLOW] += 1
            continue
        tot = np.int64(0)
        for g in range(n):
            tot += level[g]
        stats[ST_DRAWS] += tot
        zn = level[n]
        if 0 < zn <= t_store:
            beta = 0
            for mm in range(n - 1, -1, -1):
                if reduced[mm] == 1:
                    beta = mm
                    break
            rows[kept, 0] = trial
            rows[kept, 1] = zn
            rows[kept, 2] = n - beta
            for c in range(nc):
                rows[kept, 3 + c] = level[checkpoints[c]]
                rows[kept, 3 + nc + c] = reduced[checkpoints[c]]
            kept += 1
    return rows[:kept].copy(), stats
