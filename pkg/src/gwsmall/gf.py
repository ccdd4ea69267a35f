"""Iteration of the offspring pgf at zero in the survival variable u_n = 1 - f_n(0)."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .offspring import OffspringLaw, StableOffspringLaw, UnitOffspringLaw

_UNDERFLOW = 1e-300


class TableRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ExtinctionTable:
    """Survival probabilities ``u[k] = P(Z(k) > 0)`` for k = 0..n_max."""

    law: OffspringLaw
    u: np.ndarray
    n_max: int

    def survival(self, n: int) -> float:
        return float(self.u[self._check(n)])

    def delta(self, n: int) -> float:
        """Normalizer u_n / (alpha n)."""
        n = self._check(n)
        if n < 1:
            raise TableRangeError("delta is defined for n >= 1")
        return float(self.u[n] / (self.law.alpha * n))

    def threshold(self, phi: int) -> float:
        """T = 1 / u_phi."""
        return float(1.0 / self.u[self._check(phi)])

    def threshold_int(self, phi: int, w: float = 1.0) -> int:
        """Largest population size allowed by {0 < u_phi Z <= w}."""
        x = w / self.u[self._check(phi)]
        t = int(np.floor(x))
        # guard against x landing a hair below an integer through rounding
        if np.isclose(x, t + 1, rtol=1e-13, atol=0):
            t += 1
        return t

    def find_r(self, l: int, rho: float) -> int:
        """The r with ``u_{r+1} <= 1 - (1 - u_l)^rho < u_r``."""
        l = self._check(l)
        if rho <= 0:
            raise ValueError("rho must be positive")
        target = -np.expm1(rho * np.log1p(-self.u[l])) if self.u[l] < 1 else 1.0
        # u is decreasing; r is the last index with u_r > target
        if not (self.u[-1] <= target < self.u[0]):
            raise TableRangeError(
                f"target 1-(1-u_{l})^{rho} = {target:.6g} outside table range "
                f"[{self.u[-1]:.6g}, {self.u[0]:.6g}); extend n_max beyond {self.n_max}"
            )
        neg = -self.u
        r = int(np.searchsorted(neg, -target, side="left")) - 1
        return r

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["k", "u_k", "delta_k"])
            for k in range(self.n_max + 1):
                d = "" if k == 0 else repr(float(self.u[k] / (self.law.alpha * k)))
                wr.writerow([k, repr(float(self.u[k])), d])

    def _check(self, n: int) -> int:
        n = int(n)
        if not 0 <= n <= self.n_max:
            raise TableRangeError(f"index {n} outside table range [0, {self.n_max}]")
        return n


def build_table(law: OffspringLaw, n_max: int) -> ExtinctionTable:
    """Survival table by the recursion u_{k+1} = 1 - f(1 - u_k)."""
    n_max = int(n_max)
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    u = np.empty(n_max + 1)
    u[0] = 1.0
    if isinstance(law, StableOffspringLaw):
        c, e = law.c, 1.0 + law.alpha
        x = 1.0
        for k in range(n_max):
            x = x - c * x**e
            u[k + 1] = x
    elif isinstance(law, UnitOffspringLaw):
        u[:] = 1.0
    else:
        x = 1.0
        for k in range(n_max):
            x = law.step_survival(x)
            u[k + 1] = x
    bad = np.nonzero(u < _UNDERFLOW)[0]
    if bad.size:
        raise TableRangeError(
            f"u_n underflows below {_UNDERFLOW:g} at n = {bad[0]}; largest safe n_max is {bad[0] - 1}"
        )
    return ExtinctionTable(law=law, u=u, n_max=n_max)
