"""
Positivity of mu and the barrier on rho, including eps = 0
==========================================================

The mu-update is a Helmholtz solve with coefficient (eps + rho' + rho)/dt.
That coefficient stays positive at eps = 0 because rho >= r* > 0, so the
system matrix is an M-matrix and mu never turns negative.
"""
from viscous_ch import SimConfig, simulate

# %%
# Rough random initial data from the SplitMix64 preset.
cfg = SimConfig(cells=(128,), eps=0.0, delta=1.0, dt=1e-3, t_final=0.2,
                rho0="random_band(7, 0.05, 0.95)", mu0="random_band(8, 0.0, 3.0)")
tr = simulate(cfg)

print(f"barrier r* = {tr.barrier:.6f}")
for rec in tr.records[::40]:
    print(f"t = {rec.time:.3f}  min mu = {rec.min_mu:.4e}  min rho = {rec.min_rho:.6f}  max rho = {rec.max_rho:.6f}")
