"""
Verification with a manufactured solution
=========================================

Forcing terms are added so that mu* = 2 + cos(pi x) e^-t and
rho* = 0.5 + 0.25 cos(pi x) e^-t solve the system exactly.  The cell-centred
scheme should converge with order 2 in space and 1 in time.
"""
from viscous_ch import experiments as ex
from viscous_ch.potential import PotentialSpec

rep = ex.mms_convergence(PotentialSpec(lam=3.0), refinement_levels=(16, 32, 64), dt_levels=(0.02, 0.01, 0.005))
print(rep.to_csv())
print(rep.summary())
