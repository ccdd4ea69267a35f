"""Counter-based random streams: one independent SplitMix64 stream per trial.

The stream of trial ``i`` is a pure function of ``(root_seed, i)``, so any
partition of the trials over workers reproduces the same draws.
"""
import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TRIAL_KEY = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(inline="always")
def mix64(x):
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def root_key(seed: int) -> np.uint64:
    """Whitened key for a user seed (any nonnegative integer below 2**64)."""
    return np.uint64(mix64(np.uint64(int(seed) % (1 << 64))))


@nb.njit(inline="always")
def trial_state(key, trial):
    return mix64(key ^ (np.uint64(trial) * _TRIAL_KEY))


@nb.njit(inline="always")
def next_u64(state):
    """Advance a one-element state array and return 64 random bits."""
    state[0] += _GOLDEN
    return mix64(state[0])


@nb.njit(inline="always")
def uniform(state):
    """Uniform on [0, 1) with 53 random bits."""
    return float(next_u64(state) >> _S11) * _INV53


@nb.njit(inline="always")
def uniform_open(state):
    """Uniform on (0, 1]."""
    return (float(next_u64(state) >> _S11) + 1.0) * _INV53


@nb.njit(cache=True)
def stream_uniforms(key, trial, count):
    """First ``count`` uniforms of one trial stream (for inspection and tests)."""
    st = np.empty(1, dtype=np.uint64)
    st[0] = trial_state(key, trial)
    out = np.empty(count)
    for i in range(count):
        out[i] = uniform(st)
    return out
