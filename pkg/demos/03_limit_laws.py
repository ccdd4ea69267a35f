"""
Limit laws by numerical inversion
=================================

The conditional limit of u_n Z(n) has Laplace transform 1 - lam / (1 + lam**alpha)**(1/alpha).
Its distribution function comes from inverting the transform twice, with a
Talbot contour and an Euler-accelerated Fourier series, and checking that the two agree.
"""
import numpy as np

from gwsmall import RegimeSpec, m_cdf, mrca_limit_cdf, reduced_limit_pmfs, regime_transform, yaglom_lst

x = np.array([0.1, 0.5, 1.0, 2.0, 5.0])
print("M(x), alpha=1/2:", np.round(m_cdf(0.5, x), 6))
print("M(x), alpha=1   :", np.round(m_cdf(1.0, x), 6), "(exponential)")
print("1 - exp(-x)    :", np.round(-np.expm1(-x), 6))

lam = 1.0
print("Yaglom LST at 1:", yaglom_lst(0.5, lam))
for spec in (RegimeSpec(1), RegimeSpec(2, theta=0.5), RegimeSpec(3), RegimeSpec(4, y=1.0), RegimeSpec(5)):
    print(f"{spec.label():>14s}  limit LST at lam=1: {regime_transform(spec, 0.5, lam):.6f}")

# number of ancestors a distance y*phi back, and the common-ancestor distance
for y in (0.5, 1.0, 2.0):
    p = reduced_limit_pmfs(0.5, y, 4)
    print(f"y={y}: P(j=1..4) = {np.round(p, 4)}   P(d <= y phi) -> {mrca_limit_cdf(0.5, y):.4f}")
