"""
The logarithmic double well and the lower barrier
=================================================

The potential splits as f = f1 + f2 with a singular convex part
f1(r) = r ln r + (1-r) ln(1-r) and a smooth part f2(r) = lam r (1-r).
Because f1' blows down to -inf at 0, any solution starting above some
positive level stays above a barrier r* that does not depend on eps.
"""
import numpy as np

from viscous_ch import potential as pot
from viscous_ch.potential import PotentialSpec

spec = PotentialSpec(lam=3.0)

# %%
# f' has three zeros for lam > 2: two wells and the symmetric maximum.
r = np.linspace(0.01, 0.99, 9)
for x, fp in zip(r, pot.f_prime(spec, r)):
    print(f"r = {x:.3f}   f'(r) = {fp:+.4f}")

# %%
# The barrier: M = sup |f2'| = lam, and r* = min(inf rho0, r_M) with f1'(r_M) = -M.
for rho0_min in (0.01, 0.04, 0.2, 0.4):
    rs = pot.lower_barrier(spec, rho0_min)
    print(f"inf rho0 = {rho0_min:<5} r* = {rs:.10f}   f1'(r*) = {pot.f1_prime(spec, rs):+.4f}  (-M = {-spec.lam})")
