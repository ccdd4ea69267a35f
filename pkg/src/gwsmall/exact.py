"""Exact finite-horizon conditional laws via truncated pgf composition.

On the event {0 < Z(n) <= T} only pgf coefficients of degree <= T matter, so
every conditional quantity at a finite horizon is a finite sum of power-series
coefficients.  With a start population of z particles at generation k:

    E[exp(-lam a Z(m)); 0 < Z(n) <= T | Z(k) = z]
        = sum_{t=1..T} [s^t] f_{m-k}(exp(-lam a) f_{n-m}(s))^z

    P(Z(m, n) = j, 0 < Z(n) <= T | Z(k) = z)
        = [x^j] f_{m-k}(q + u x)^z * sum_{t=j..T} [s^t] ((f_{n-m}(s) - q) / u)^j,
      q = f_{n-m}(0),  u = 1 - q.

These identities drive both the exact evaluator (k = 0, z = 1) and the
conditional Monte Carlo estimator, which simulates generations 0..k and
integrates the remainder with the same series.
"""
from __future__ import annotations

import math

import numba as nb
import numpy as np

from .offspring import OffspringLaw
from .series import identity, series_pow_scaled


@nb.njit(cache=True, nogil=True)
def _scaled_power(g, z):
    """g(s)**z as ``(log_scale, q)`` with coefficients exp(log_scale) * q[t].

    Handles a vanishing constant term by factoring out s**v.
    """
    T = g.shape[0]
    v = 0
    while v < T and g[v] == 0.0:
        v += 1
    q = np.zeros(T)
    if v == T or v * z >= T:
        return 0.0, q
    h = g[v:].copy()
    ls, qh = series_pow_scaled(h, float(z))
    shift = v * z
    for t in range(shift, T):
        q[t] = qh[t - shift]
    return ls, q


@nb.njit(cache=True, nogil=True)
def _event_mass(g, zs, lo):
    """sum_{t>=lo} [s^t] g(s)^z for each z."""
    out = np.zeros(zs.shape[0])
    for i in range(zs.shape[0]):
        z = zs[i]
        if z == 0:
            out[i] = 1.0 if lo == 0 else 0.0
            continue
        ls, q = _scaled_power(g, z)
        acc = 0.0
        for t in range(lo, g.shape[0]):
            acc += q[t]
        if acc > 0.0:
            out[i] = math.exp(ls + math.log(acc))
    return out


@nb.njit(cache=True, nogil=True)
def _coeffs_of_power(g, zs, jmax):
    """[x^j] g(x)^z for j = 0..jmax and each z."""
    out = np.zeros((zs.shape[0], jmax + 1))
    for i in range(zs.shape[0]):
        z = zs[i]
        if z == 0:
            out[i, 0] = 1.0
            continue
        ls, q = _scaled_power(g, z)
        for j in range(jmax + 1):
            if q[j] > 0.0:
                out[i, j] = math.exp(ls + math.log(q[j]))
    return out


class FiniteHorizon:
    """Exact pgf coefficient machinery for one (law, horizon n, threshold T)."""

    def __init__(self, law: OffspringLaw, n: int, T: int):
        if T < 1:
            raise ValueError("threshold T must be at least 1")
        self.law, self.n, self.T = law, int(n), int(T)
        self._iter = {0: identity(self.T)}

    def f_series(self, j: int) -> np.ndarray:
        """Coefficients of f_j(s) up to degree T."""
        if j not in self._iter:
            start = max(k for k in self._iter if k <= j)
            h = self._iter[start]
            for i in range(start, j):
                h = self.law.compose_series(h)
                if (i + 1) % 16 == 0:
                    self._iter[i + 1] = h
            self._iter[j] = h
        return self._iter[j]

    def _compose(self, h: np.ndarray, times: int) -> np.ndarray:
        for _ in range(times):
            h = self.law.compose_series(h)
        return h

    # --- event -----------------------------------------------------------
    def event_series(self, k: int = 0) -> np.ndarray:
        return self.f_series(self.n - k)

    def event_weights(self, zs, k: int = 0) -> np.ndarray:
        """P(0 < Z(n) <= T | Z(k) = z)."""
        return _event_mass(self.event_series(k), np.asarray(zs, dtype=np.int64), 1)

    def event_probability(self) -> float:
        return float(self.event_weights([1])[0])

    # --- conditional Laplace transforms ------------------------------------
    def lst_series(self, m: int, scale: float, lam: float, k: int = 0) -> np.ndarray:
        """f_{m-k}(exp(-lam*scale) f_{n-m}(s)) up to degree T."""
        if not k <= m <= self.n:
            raise ValueError("need k <= m <= n")
        inner = math.exp(-lam * scale) * self.f_series(self.n - m)
        return self._compose(inner, m - k)

    def lst_weights(self, zs, m: int, scale: float, lam: float, k: int = 0) -> np.ndarray:
        """E[exp(-lam*scale*Z(m)); 0 < Z(n) <= T | Z(k) = z]."""
        g = self.lst_series(m, scale, lam, k)
        return _event_mass(g, np.asarray(zs, dtype=np.int64), 1)

    def conditional_lst(self, m: int, scale: float, lam: float) -> float:
        num = self.lst_weights([1], m, scale, lam)[0]
        return float(num / self.event_probability())

    # --- reduced process ---------------------------------------------------
    def reduced_parts(self, m: int, k: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """(g, a) with g(x) = f_{m-k}(q + u x) and a_j = sum_{t>=j} [s^t] d(s)^j.

        Here q = f_{n-m}(0), u = 1 - q and d(s) = (f_{n-m}(s) - q) / u is the
        pgf of Z(n-m) given survival; the rescaling keeps every coefficient in [0, 1].
        """
        if not k <= m < self.n:
            raise ValueError("need k <= m < n")
        fs = self.f_series(self.n - m)
        q = fs[0]
        u = 1.0 - q
        x = np.zeros(self.T + 1)
        x[0] = q
        if self.T >= 1:
            x[1] = u
        g = self._compose(x, m - k)
        d = fs / u
        d[0] = 0.0
        a = np.zeros(self.T + 1)
        # d has no constant term, so (d^j)[t] = 0 for t < j
        p = np.zeros(self.T + 1)
        p[0] = 1.0
        for j in range(1, self.T + 1):
            p = np.convolve(p, d)[: self.T + 1]
            a[j] = p[j:].sum()
        return g, a

    def reduced_weights(self, zs, m: int, k: int = 0) -> np.ndarray:
        """Matrix W[i, j] = P(Z(m,n) = j, 0 < Z(n) <= T | Z(k) = zs[i]), j = 0..T."""
        g, a = self.reduced_parts(m, k)
        c = _coeffs_of_power(g, np.asarray(zs, dtype=np.int64), self.T)
        return c * a[None, :]

    def reduced_pmf(self, m: int) -> np.ndarray:
        """P(Z(m, n) = j | H) for j = 0..T (entry 0 is zero)."""
        w = self.reduced_weights([1], m)[0]
        return w / self.event_probability()
