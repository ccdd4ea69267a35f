"""Truncated power-series arithmetic used by the exact finite-horizon engine.

All series are float64 coefficient arrays ``a[0..T]``; products and powers are
truncated to the input length.
"""
import math

import numba as nb
import numpy as np


@nb.njit(cache=True, nogil=True)
def series_pow(a, beta):
    """Coefficients of a(s)**beta for real beta; requires a[0] > 0.

    Uses the J.C.P. Miller recurrence
    ``k a0 P_k = sum_j ((beta + 1) j - k) a_j P_{k-j}``.
    """
    T = a.shape[0]
    out = np.zeros(T)
    a0 = a[0]
    out[0] = a0 ** beta
    for k in range(1, T):
        acc = 0.0
        for j in range(1, k + 1):
            acc += ((beta + 1.0) * j - k) * a[j] * out[k - j]
        out[k] = acc / (k * a0)
    return out


@nb.njit(cache=True, nogil=True)
def series_pow_scaled(a, z):
    """``(log_scale, q)`` with a(s)**z = exp(log_scale) * q(s) and q[0] = 1.

    Keeps large integer powers representable when a[0]**z underflows.
    """
    T = a.shape[0]
    q = np.zeros(T)
    q[0] = 1.0
    a0 = a[0]
    for k in range(1, T):
        acc = 0.0
        for j in range(1, k + 1):
            acc += ((z + 1.0) * j - k) * a[j] * q[k - j]
        q[k] = acc / (k * a0)
    return z * math.log(a0), q


@nb.njit(cache=True, nogil=True)
def series_reciprocal(a):
    T = a.shape[0]
    out = np.zeros(T)
    out[0] = 1.0 / a[0]
    for k in range(1, T):
        acc = 0.0
        for j in range(1, k + 1):
            acc += a[j] * out[k - j]
        out[k] = -acc / a[0]
    return out


@nb.njit(cache=True, nogil=True)
def series_mul(a, b):
    T = a.shape[0]
    out = np.zeros(T)
    for i in range(T):
        if a[i] == 0.0:
            continue
        for j in range(T - i):
            out[i + j] += a[i] * b[j]
    return out


def iterate(law, h: np.ndarray, times: int) -> np.ndarray:
    """Coefficients of f_times(h(s)) (the law's pgf applied ``times`` times)."""
    h = np.array(h, dtype=float)
    for _ in range(times):
        h = law.compose_series(h)
    return h


def identity(T: int) -> np.ndarray:
    """The series s, truncated to degree T."""
    h = np.zeros(T + 1)
    if T >= 1:
        h[1] = 1.0
    return h
