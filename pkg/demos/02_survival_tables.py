"""
Survival probabilities and the event threshold
==============================================
"""
from gwsmall import EventSpec, StableOffspringLaw, build_table

law = StableOffspringLaw(alpha=0.5)
table = build_table(law, 10**5)

# u_n = P(Z(n) > 0) decays like n**(-1/alpha)
for n in (10, 100, 1000, 10**4, 10**5):
    print(f"n={n:6d}  u_n={table.survival(n):.6e}  n**2 * u_n={n**2 * table.survival(n):.4f}")

# the small-population event {0 < Z(n) <= w / u_phi}
n = 400
ev = EventSpec(n, phi=20)
print("T_int at n=400, phi=20:", ev.t_int(table))

# smallest r with u_{r+1} <= 1 - (1 - u_l)**rho
print("find_r(l=20, rho=3):", table.find_r(20, 3.0))
