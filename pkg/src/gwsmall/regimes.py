"""Observation regimes for Z(m) given the small-deviation event at horizon n."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass


def _ceil_pow(n: int, a: float) -> int:
    # exact integer powers must not be pushed up by rounding (400**0.5 -> 20)
    x = n**a
    r = round(x)
    return int(r) if abs(x - r) < 1e-9 * max(1.0, x) else math.ceil(x)


@dataclass(frozen=True)
class RegimeSpec:
    """One of the five regimes.

    Scales are ``phi(n) = ceil(n**a_phi)``, ``psi(n) = ceil(n**a_psi)`` and
    ``chi(n) = ceil(n**a_chi)`` (``chi = 0`` when ``a_chi`` is None).  The
    observation time m is

    ====== ================================ =====================
    regime m                                Z(m) multiplied by
    ====== ================================ =====================
    1      ceil(n**a_m)                     u_m
    2      round(theta * n)                 u_m
    3      n - psi(n)                       u_psi = u_{n-m}
    4      n - ceil(y * phi(n))             u_{n-m}
    5      n - chi(n)                       u_phi
    ====== ================================ =====================
    """

    regime: int
    theta: float = 0.5
    y: float = 1.0
    a_phi: float = 0.5
    a_psi: float = 0.75
    a_chi: float | None = None
    a_m: float = 0.5

    def __post_init__(self):
        if self.regime not in (1, 2, 3, 4, 5):
            raise ValueError(f"regime must be 1..5, got {self.regime}")
        if self.regime == 2 and not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie in (0, 1)")
        if self.regime == 4 and not self.y > 0:
            raise ValueError("y must be positive")
        if not 0.0 < self.a_phi < 1.0:
            raise ValueError("a_phi must lie in (0, 1) so that phi -> inf and phi/n -> 0")
        if self.regime == 3 and not self.a_phi < self.a_psi < 1.0:
            raise ValueError("regime 3 needs a_phi < a_psi < 1")
        if self.regime == 5 and self.a_chi is not None and not 0.0 <= self.a_chi < self.a_phi:
            raise ValueError("regime 5 needs 0 <= a_chi < a_phi")
        if self.regime == 1 and not 0.0 < self.a_m < 1.0:
            raise ValueError("regime 1 needs 0 < a_m < 1")

    def phi(self, n: int) -> int:
        return _ceil_pow(n, self.a_phi)

    def psi(self, n: int) -> int:
        return _ceil_pow(n, self.a_psi)

    def chi(self, n: int) -> int:
        return 0 if self.a_chi is None else _ceil_pow(n, self.a_chi)

    def m(self, n: int) -> int:
        r = self.regime
        if r == 1:
            return _ceil_pow(n, self.a_m)
        if r == 2:
            return int(round(self.theta * n))
        if r == 3:
            return n - self.psi(n)
        if r == 4:
            return n - math.ceil(self.y * self.phi(n) - 1e-12)
        return n - self.chi(n)

    def scale_index(self, n: int, phi: int | None = None) -> int:
        """Generation j such that Z(m) is multiplied by u_j."""
        r = self.regime
        m = self.m(n)
        if r in (1, 2):
            return m
        if r in (3, 4):
            return n - m
        return self.phi(n) if phi is None else phi

    def label(self) -> str:
        extra = {2: f"theta={self.theta}", 4: f"y={self.y}"}.get(self.regime, "")
        return f"regime{self.regime}" + (f"[{extra}]" if extra else "")

    def to_dict(self) -> dict:
        return asdict(self)
