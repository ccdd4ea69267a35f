"""
Exact values at a finite horizon
================================

Composing truncated power series gives conditional quantities at finite n with
no sampling noise. They show how far n = 400 still is from the limit.
"""
import math

from gwsmall import FiniteHorizon, RegimeSpec, StableOffspringLaw, build_table, regime_transform
from gwsmall.estimate import regime_scale

law = StableOffspringLaw(alpha=0.5)
spec = RegimeSpec(3)
for n in (100, 400, 1600):
    table = build_table(law, n)
    phi = math.ceil(math.sqrt(n))
    T = table.threshold_int(phi)
    fh = FiniteHorizon(law, n, T)
    v = fh.conditional_lst(spec.m(n), regime_scale(spec, n, table, phi), 1.0)
    print(f"n={n:5d} T={T:4d}  P(H)={fh.event_probability():.3e}  "
          f"LST={v:.4f}  limit={regime_transform(spec, 0.5, 1.0):.4f}")

# reduced process: P(Z(n - phi, n) = j | H) for j = 1, 2, 3
n = 400
table = build_table(law, n)
fh = FiniteHorizon(law, n, table.threshold_int(20))
print("reduced pmf j=1..3 at n=400:", [round(float(p), 4) for p in fh.reduced_pmf(n - 20)[1:4]])
