"""
Discrete energy identities
==========================

Testing the mu-equation with mu gives the Lyapunov law

    E(t) + int_0^t ||grad mu||^2 = E(0),   E = int (eps/2) mu^2 + rho mu^2,

and testing the rho-equation with d_t rho gives the free-energy balance.
The scheme satisfies both up to O(dt); halving dt halves the defect.
"""
from viscous_ch import diagnostics as dg
from viscous_ch import simulate
from viscous_ch.config import tanh_preset

for dt in (2e-3, 1e-3, 5e-4):
    cfg = tanh_preset(eps=0.05, dt=dt, t_final=1.0)
    rec = simulate(cfg).records
    print(f"dt = {dt:<7g} Lyapunov defect = {dg.dissipation_residual(rec):.3e}   "
          f"free-energy defect = {dg.free_energy_residual(rec, cfg.delta):.3e}   "
          f"largest increase of E = {dg.lyapunov_drift(rec):.1e}")
