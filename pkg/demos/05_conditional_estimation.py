"""
Monte Carlo under a rare conditioning event
===========================================

P(0 < Z(400) <= T) is about 6e-6, too small for plain rejection on one core.
The split estimator simulates up to generation phi and finishes each trial
with its exact conditional expectation.
"""
from gwsmall import (EventSpec, FiniteHorizon, RegimeSpec, StableOffspringLaw, build_table,
                     estimate_reduced_pmf, estimate_regimes)

law = StableOffspringLaw(alpha=0.5)
n = 400
table = build_table(law, n)
specs = [RegimeSpec(1), RegimeSpec(5)]
est, pe = estimate_regimes(law, n, specs, [1.0], min_hits=5000, seed=3, table=table)
print(f"P(H) = {pe.value:.3e} +/- {pe.stderr:.1e}  ({pe.trials} trials)")
for (label, lam), e in est.items():
    print(f"{label:>10s} lam={lam}: {e.value:.4f} +/- {e.stderr:.1e}")

ev = EventSpec(n, 20)
red = estimate_reduced_pmf(law, ev, y=1.0, j_max=4, min_hits=5000, seed=3, method="split", table=table)
exact = FiniteHorizon(law, n, ev.t_int(table)).reduced_pmf(n - 20)
for j in range(1, 5):
    e = red.pmf[j - 1]
    print(f"j={j}: MC {e.value:.4f} +/- {e.stderr:.1e}   exact {exact[j]:.4f}")
