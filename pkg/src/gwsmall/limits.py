"""Closed-form limit objects: the Yaglom law M, its convolution powers, the
five regime transforms, the reduced-process pmf and the small-deviation
asymptotics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma, gammainc, gammaln

from .gf import ExtinctionTable
from .inversion import invert_cdf
from .regimes import RegimeSpec


def yaglom_lst(alpha: float, lam):
    """1 - (1 + lam^-alpha)^(-1/alpha), written to avoid cancellation at both ends."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValueError("lambda must be positive")
    out = -np.expm1(-np.log1p(lam**-alpha) / alpha)
    return out if out.ndim else float(out)


def _lst_complex(alpha: float, s):
    # 1 - s (1 + s^alpha)^(-1/alpha) on the principal branch; analytic off (-inf, 0]
    return 1.0 - s * (1.0 + s**alpha) ** (-1.0 / alpha)


def m_cdf(alpha: float, x, tol: float = 1e-6, method: str = "both"):
    """Yaglom limit CDF M(x) by Laplace inversion of LST(s)/s."""
    val = invert_cdf(lambda s: _lst_complex(alpha, s) / s, x, tol=tol, method=method)
    return val if np.ndim(x) else float(val[0])


def m_conv_cdf(alpha: float, j: int, x, tol: float = 1e-6, method: str = "both"):
    """CDF of the j-fold convolution M^{*j} at x."""
    if j < 1:
        raise ValueError("j must be at least 1")
    val = invert_cdf(lambda s: _lst_complex(alpha, s) ** j / s, x, tol=tol, method=method)
    return val if np.ndim(x) else float(val[0])


def m_conv_cdfs(alpha: float, J: int, x: float, tol: float = 1e-6) -> np.ndarray:
    """M^{*j}(x) for j = 1..J in one inversion pass (array index j - 1)."""
    from .inversion import euler, talbot

    js = np.arange(1, J + 1)

    def batch(F_backend):
        out = np.empty(J)
        for i, j in enumerate(js):
            out[i] = F_backend(lambda s, j=j: _lst_complex(alpha, s) ** j / s, [x])[0]
        return out

    a = batch(talbot)
    b = batch(euler)
    gap = np.abs(a - b)
    if np.any(gap > tol):
        from .inversion import InversionAccuracyError

        i = int(np.argmax(gap))
        raise InversionAccuracyError(
            f"backends disagree for M^*{i + 1}({x}): {a[i]!r} vs {b[i]!r}", a[i], b[i]
        )
    return np.clip(a, 0.0, 1.0)


def series_weights(alpha: float, J: int) -> np.ndarray:
    """w_j = alpha Gamma(j + alpha) / j!, j = 1..J, by the ratio recurrence."""
    w = np.empty(J)
    w[0] = alpha * gamma(1.0 + alpha)
    for j in range(1, J):
        w[j] = w[j - 1] * (j + alpha) / (j + 1)
    return w


def term2_closed_form(alpha: float, t: float) -> float:
    """sum_{j>=1} w_j t^j = Gamma(alpha + 1) ((1 - t)^-alpha - 1)."""
    return gamma(alpha + 1.0) * math.expm1(-alpha * math.log1p(-t))


def term2_identity_check(alpha: float, t: float, rtol: float = 1e-17, j_cap: int = 100_000) -> float:
    """|partial sum of the weight series at t - closed form|, with adaptive length."""
    if not 0.0 <= t < 1.0:
        raise ValueError("t must lie in [0, 1)")
    if t == 0.0:
        return 0.0
    w = alpha * gamma(1.0 + alpha)
    term = w * t
    total = 0.0
    j = 1
    while j <= j_cap:
        total += term
        if term < rtol * total and term * t / (1.0 - t) < rtol * total:
            break
        term *= t * (j + alpha) / (j + 1)
        j += 1
    return abs(total - term2_closed_form(alpha, t))


def _weighted_tail_bound(alpha: float, J: int, t: float) -> float:
    """sum_{j>J} w_j t^j, via the closed form minus the partial sum.

    Guarded by the ratio bound w_{J+1} t^{J+1} / (1 - t) (term ratios are below t).
    """
    if t <= 0.0:
        return 0.0
    w = series_weights(alpha, J + 1)
    powers = t ** np.arange(1, J + 2)
    partial = float(np.dot(w[:J], powers[:J]))
    closed = term2_closed_form(alpha, t)
    ratio_bound = w[J] * powers[J] / (1.0 - t)
    via_closed = max(closed - partial, 0.0) + 4e-16 * closed
    return min(via_closed, ratio_bound)


def conv_tail_bound(alpha: float, J: int, x: float, discount: float = 1.0) -> float:
    """Certified bound on sum_{j>J} w_j discount^j M^{*j}(x).

    Uses M^{*j}(x) <= min(M(x)^j, e^{s x} LST(s)^j) over a small grid of s.
    """
    best = _weighted_tail_bound(alpha, J, discount * m_cdf(alpha, x))
    for s in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
        if s * x > 700:
            continue
        t = discount * yaglom_lst(alpha, s)
        best = min(best, math.exp(s * x) * _weighted_tail_bound(alpha, J, t))
    return best


@dataclass(frozen=True)
class SeriesResult:
    value: float
    bound: float
    terms: int


def _adaptive_series(alpha: float, x: float, discount: float, tol: float, j_max: int):
    J = 16
    while True:
        bound = conv_tail_bound(alpha, J, x, discount)
        if bound < tol or J >= j_max:
            break
        J = min(2 * J, j_max)
    if bound >= tol:
        raise ArithmeticError(f"series tail bound {bound:.3g} not below {tol:g} with J <= {j_max}")
    mj = m_conv_cdfs(alpha, J, x)
    w = series_weights(alpha, J)
    return w, mj, bound, J


def lemma_proper_sum(alpha: float, x: float, tol: float = 1e-6, j_max: int = 500) -> SeriesResult:
    """U(x) = sum_j w_j M^{*j}(x), which should equal x^alpha."""
    w, mj, bound, J = _adaptive_series(alpha, x, 1.0, tol, j_max)
    return SeriesResult(float(np.dot(w, mj)), bound, J)


def regime4_transform(alpha: float, y: float, lam: float, tol: float = 1e-6, j_max: int = 500) -> SeriesResult:
    """sum_j w_j (1 + lam)^-(alpha + j) y M^{*j}(y^{-1/alpha}) with certified tail bound."""
    if y <= 0:
        raise ValueError("y must be positive")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    x = y ** (-1.0 / alpha)
    d = 1.0 / (1.0 + lam)
    pre = y * d**alpha
    w, mj, bound, J = _adaptive_series(alpha, x, d, tol / max(pre, 1e-300), j_max)
    val = pre * float(np.dot(w * d ** np.arange(1, J + 1), mj))
    return SeriesResult(val, pre * bound, J)


def regime_transform(spec: RegimeSpec, alpha: float, lam: float) -> float:
    """Limit of the conditional Laplace transform in the given regime."""
    lam = float(lam)
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    a = alpha
    r = spec.regime
    if r == 1:
        return (1.0 + lam**a) ** (-(1.0 / a + 1.0))
    if r == 2:
        th = spec.theta
        inner = lam * (1.0 - th) ** (1.0 / a) + th ** (1.0 / a)
        return (1.0 - th + inner**a) ** (-(1.0 / a + 1.0))
    if r == 3:
        return (1.0 + lam) ** (-(a + 1.0))
    if r == 4:
        return regime4_transform(a, spec.y, lam).value
    if lam == 0.0:
        return 1.0
    # alpha int_0^1 x^(alpha-1) e^(-lam x) dx = alpha lam^-alpha gamma_lower(alpha, lam)
    return float(math.exp(math.log(a) - a * math.log(lam) + gammaln(a)) * gammainc(a, lam))


def reduced_limit_pmf(alpha: float, y: float, j: int, tol: float = 1e-6) -> float:
    """Limit of P(Z(n - y phi, n) = j | H) = w_j y M^{*j}(y^{-1/alpha})."""
    if j < 1:
        raise ValueError("j must be at least 1")
    if y <= 0:
        raise ValueError("y must be positive")
    x = y ** (-1.0 / alpha)
    w = series_weights(alpha, j)[-1]
    return float(w * y * m_conv_cdf(alpha, j, x, tol=tol))


def reduced_limit_pmfs(alpha: float, y: float, J: int) -> np.ndarray:
    """Limit pmf for j = 1..J (index j - 1)."""
    x = y ** (-1.0 / alpha)
    return series_weights(alpha, J) * y * m_conv_cdfs(alpha, J, x)


def reduced_limit_tail_bound(alpha: float, y: float, J: int) -> float:
    """Certified bound on the limit mass at j > J."""
    return y * conv_tail_bound(alpha, J, y ** (-1.0 / alpha))


def mrca_limit_cdf(alpha: float, y: float) -> float:
    """Limit of P(d(n) <= y phi(n) | H) = alpha Gamma(1+alpha) y M(y^{-1/alpha})."""
    return reduced_limit_pmf(alpha, y, 1)


def small_deviation_prob(table: ExtinctionTable, n: int, phi: int) -> float:
    """Asymptotic P(H(n, phi)) ~ Delta(n) phi / Gamma(1 + alpha)."""
    if not 0 < phi < n:
        raise ValueError("need 0 < phi < n")
    return table.delta(n) * phi / gamma(1.0 + table.law.alpha)


def small_deviation_prob_T_form(table: ExtinctionTable, n: int, phi: int) -> float:
    """Same asymptotic written with T = 1/u_phi: Delta(n) T^alpha / (alpha Gamma(1+alpha) c)."""
    if not 0 < phi < n:
        raise ValueError("need 0 < phi < n")
    law = table.law
    a = law.alpha
    T = table.threshold(phi)
    return table.delta(n) * T**a / (a * gamma(1.0 + a) * law.c)


def finite_variance_small_deviation(n: int, T: float, sigma2: float) -> float:
    """P(0 < Z(n) < T) ~ 4 T / (sigma^4 n^2) for finite offspring variance."""
    return 4.0 * T / (sigma2**2 * n**2)


def stirling2(J: int, k: int) -> int:
    """Stirling number of the second kind by the alternating binomial sum."""
    _check_comb_range(J, k)
    s = sum((-1) ** (k - r) * math.comb(k, r) * r**J for r in range(1, k + 1))
    return s // math.factorial(k)


def bell_at_ones(J: int, k: int) -> int:
    """Partial Bell polynomial B_{J,k}(1, ..., 1) by the triangular recurrence."""
    _check_comb_range(J, k)
    # B[n][q] = sum_{i=1}^{n-q+1} C(n-1, i-1) B[n-i][q-1]
    B = [[0] * (k + 1) for _ in range(J + 1)]
    B[0][0] = 1
    for nn in range(1, J + 1):
        for q in range(1, min(nn, k) + 1):
            B[nn][q] = sum(math.comb(nn - 1, i - 1) * B[nn - i][q - 1] for i in range(1, nn - q + 2))
    return B[J][k]


def _check_comb_range(J: int, k: int) -> None:
    if not (1 <= k <= J <= 30):
        raise OverflowError(f"need 1 <= k <= J <= 30, got J={J}, k={k}")
