"""Critical offspring laws.

The stable family has probability generating function

    f(s) = s + c (1 - s)^(1 + alpha),   0 < alpha <= 1,  0 < c <= 1/(1 + alpha),

which is critical (mean one) and, for alpha < 1, has infinite variance.  Its
pmf and tail probabilities have closed recurrences, so the law can be
sampled exactly without truncating the support.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

# law codes shared with the compiled simulation kernels
UNIT, GEOMETRIC, STABLE = 0, 1, 2


class OffspringLaw:
    """Common interface: pmf, tail, pgf and truncated-series composition."""

    code: int = -1
    alpha: float = 1.0
    table_cutoff: int = 4096

    def pmf(self, k: int) -> float:
        raise NotImplementedError

    def tail(self, k: int) -> float:
        """P(xi > k)."""
        raise NotImplementedError

    def pgf(self, s):
        raise NotImplementedError

    def compose_series(self, h: np.ndarray) -> np.ndarray:
        """Coefficients of f(h(s)) truncated to len(h) terms."""
        raise NotImplementedError

    def step_survival(self, u: float) -> float:
        """1 - f(1 - u), evaluated without forming f."""
        raise NotImplementedError

    def pmf_array(self, kmax: int) -> np.ndarray:
        return np.array([self.pmf(k) for k in range(kmax + 1)])

    def tail_array(self, kmax: int) -> np.ndarray:
        return np.array([self.tail(k) for k in range(kmax + 1)])

    def sampler_tables(self) -> tuple[np.ndarray, np.ndarray, float]:
        """Alias tables over cells 0..K-1 plus a tail cell K meaning xi >= K.

        Returns ``(prob, alias, tail_start)`` where ``tail_start`` is P(xi > K-1).
        """
        K = self.table_cutoff
        p = np.empty(K + 1)
        p[:K] = self.pmf_array(K - 1)
        p[K] = self.tail(K - 1)
        prob, alias = _vose(p)
        return prob, alias, p[K]

    def spec_string(self) -> str:
        raise NotImplementedError


def _vose(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = len(p)
    scaled = p * (n / p.sum())
    prob = np.zeros(n)
    alias = np.arange(n, dtype=np.int64)
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        (small if scaled[g] < 1.0 else large).append(g)
    for i in large + small:
        prob[i] = 1.0
    return prob, alias


@dataclass(frozen=True)
class StableOffspringLaw(OffspringLaw):
    """pgf ``s + c(1-s)^(1+alpha)``; ``c`` defaults to ``1/(1+alpha)`` (so p_1 = 0)."""

    alpha: float = 0.5
    c: float | None = None
    table_cutoff: int = 4096
    _pmf: np.ndarray = field(init=False, repr=False, compare=False)
    _tail: np.ndarray = field(init=False, repr=False, compare=False)

    code = STABLE

    def __post_init__(self):
        a = float(self.alpha)
        if not 0.0 < a <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        c = 1.0 / (1.0 + a) if self.c is None else float(self.c)
        if not 0.0 < c <= 1.0 / (1.0 + a) * (1 + 1e-15):
            raise ValueError(f"c must lie in (0, 1/(1+alpha)] = (0, {1 / (1 + a):.6g}], got {c}")
        if int(self.table_cutoff) < 2:
            raise ValueError("table_cutoff must be at least 2")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "table_cutoff", int(self.table_cutoff))
        n = max(self.table_cutoff + 1, 16)
        object.__setattr__(self, "_pmf", self._pmf_recurrence(n))
        object.__setattr__(self, "_tail", self._tail_recurrence(n))

    def _pmf_recurrence(self, kmax: int) -> np.ndarray:
        a, c = self.alpha, self.c
        p = np.empty(kmax + 1)
        p[0] = c
        p[1] = max(1.0 - c * (1.0 + a), 0.0)
        p[2] = c * (1.0 + a) * a / 2.0
        for k in range(2, kmax):
            p[k + 1] = p[k] * (k - 1 - a) / (k + 1)
        return p

    def _tail_recurrence(self, kmax: int) -> np.ndarray:
        a, c = self.alpha, self.c
        t = np.empty(kmax + 1)
        t[0] = 1.0 - c
        t[1] = c * a
        for k in range(1, kmax):
            t[k + 1] = t[k] * (k - a) / (k + 1)
        return t

    def pmf(self, k: int) -> float:
        k = int(k)
        if k < 0:
            return 0.0
        if k < len(self._pmf):
            return float(self._pmf[k])
        return self.tail(k - 1) - self.tail(k)

    def tail(self, k: int) -> float:
        k = int(k)
        if k < 0:
            return 1.0
        if k < len(self._tail):
            return float(self._tail[k])
        # continue the ratio recurrence from the cached end
        j = len(self._tail) - 1
        t = float(self._tail[j])
        a = self.alpha
        while j < k:
            t *= (j - a) / (j + 1)
            j += 1
        return t

    def pmf_array(self, kmax: int) -> np.ndarray:
        if kmax < len(self._pmf):
            return self._pmf[: kmax + 1].copy()
        return super().pmf_array(kmax)

    def tail_array(self, kmax: int) -> np.ndarray:
        if kmax < len(self._tail):
            return self._tail[: kmax + 1].copy()
        return super().tail_array(kmax)

    def pgf(self, s):
        s = np.asarray(s, dtype=float)
        return s + self.c * (1.0 - s) ** (1.0 + self.alpha)

    def step_survival(self, u: float) -> float:
        return u - self.c * u ** (1.0 + self.alpha)

    def compose_series(self, h: np.ndarray) -> np.ndarray:
        from .series import series_pow

        one_minus = -np.asarray(h, dtype=float)
        one_minus[0] += 1.0
        return h + self.c * series_pow(one_minus, 1.0 + self.alpha)

    def spec_string(self) -> str:
        return f"stable(alpha={self.alpha!r}, c={self.c!r})"


@dataclass(frozen=True)
class GeometricCriticalLaw(OffspringLaw):
    """p_k = 2^-(k+1); pgf 1/(2 - s); variance f''(1) = 2."""

    table_cutoff: int = 64

    code = GEOMETRIC
    alpha = 1.0
    sigma2 = 2.0

    def pmf(self, k: int) -> float:
        return 0.0 if k < 0 else math.ldexp(1.0, -int(k) - 1)

    def tail(self, k: int) -> float:
        return 1.0 if k < 0 else math.ldexp(1.0, -int(k) - 1)

    def pgf(self, s):
        return 1.0 / (2.0 - np.asarray(s, dtype=float))

    def step_survival(self, u: float) -> float:
        return u / (1.0 + u)

    def compose_series(self, h: np.ndarray) -> np.ndarray:
        from .series import series_reciprocal

        d = -np.asarray(h, dtype=float)
        d[0] += 2.0
        return series_reciprocal(d)

    def spec_string(self) -> str:
        return "geometric"


@dataclass(frozen=True)
class UnitOffspringLaw(OffspringLaw):
    """Deterministic law: every particle has exactly one child."""

    table_cutoff: int = 2

    code = UNIT
    alpha = 1.0

    def pmf(self, k: int) -> float:
        return 1.0 if k == 1 else 0.0

    def tail(self, k: int) -> float:
        return 1.0 if k < 1 else 0.0

    def pgf(self, s):
        return np.asarray(s, dtype=float)

    def step_survival(self, u: float) -> float:
        return u

    def compose_series(self, h: np.ndarray) -> np.ndarray:
        return np.array(h, dtype=float)

    def spec_string(self) -> str:
        return "unit"


_STABLE_RE = re.compile(r"^\s*stable\s*\((.*)\)\s*$")


def parse_law(text: str) -> OffspringLaw:
    """Parse ``stable(alpha=<f>, c=<f>)``, ``geometric`` or ``unit``.

    >>> parse_law("stable(alpha=0.5)").c
    0.6666666666666666
    """
    t = text.strip()
    if t == "geometric":
        return GeometricCriticalLaw()
    if t == "unit":
        return UnitOffspringLaw()
    m = _STABLE_RE.match(t)
    if not m:
        raise ValueError(f"unrecognised law specification: {text!r}")
    kwargs = {}
    for part in filter(None, (p.strip() for p in m.group(1).split(","))):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in ("alpha", "c", "table_cutoff"):
            raise ValueError(f"unknown stable-law parameter {key!r}")
        kwargs[key] = int(val) if key == "table_cutoff" else float(val)
    if "alpha" not in kwargs:
        raise ValueError("stable law needs alpha")
    return StableOffspringLaw(**kwargs)
