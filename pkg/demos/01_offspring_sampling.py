"""
Sampling heavy-tailed offspring
===============================

The default law has generating function f(s) = s + c (1 - s)**(1 + alpha).
Its mean is one and, for alpha < 1, its variance is infinite.
"""
import numpy as np

from gwsmall import GeometricCriticalLaw, StableOffspringLaw, parse_law, sample

law = StableOffspringLaw(alpha=0.5)
print(law.spec_string(), " c =", law.c)

# the first few probabilities, straight from the series
print("p_0..p_5:", [round(law.pmf(k), 5) for k in range(6)])

# ten million exact draws; the empirical mean wanders because of the tail
x = sample(law, 10**7, seed=7)
print("sample mean:", x.mean(), " largest draw:", x.max())

# tail frequencies against P(xi > k)
for k in (10, 100, 1000):
    print(f"P(xi > {k:4d})  empirical {np.mean(x > k):.3e}   exact {law.tail(k):.3e}")

# laws can also be named with a short string
geo = parse_law("geometric")
print("geometric draws:", sample(geo, 10, seed=1))
