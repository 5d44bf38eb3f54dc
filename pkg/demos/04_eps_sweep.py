"""
The eps -> 0 limit
==================

Each run uses the same grid, time step and data; the eps = 0 run solves the
limit problem written as 2 d_t(mu rho) - lap mu = mu d_t rho.  Errors are
L2(0,T;L2) distances to that reference.
"""
from viscous_ch import experiments as ex
from viscous_ch.config import tanh_preset

rep = ex.eps_sweep(tanh_preset(dt=1e-3, t_final=1.0), [0.1, 0.05, 0.025, 0.0125])
print(rep.summary())
print()
print(rep.to_csv())
