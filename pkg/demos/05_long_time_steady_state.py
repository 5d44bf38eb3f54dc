"""
Long-time behaviour
===================

Along a trajectory mu flattens to a constant mu_s and rho approaches a
solution of -lap rho + f'(rho) = mu_s.  Which steady state is selected
depends on the data; the run only records it.
"""
import numpy as np

from viscous_ch import experiments as ex
from viscous_ch.config import tanh_preset
from viscous_ch.stepper import State, StepParams, step

rep = ex.long_time(tanh_preset(eps=0.05, dt=1e-3), t_max=100.0, stall_tol=1e-6)
print(rep.summary())
print("final rho (every 16th cell):", np.round(rep.final.rho[::16], 6))

# %%
# The steady problem is the same for every eps, so the limit state is a
# fixed point of the eps = 0 scheme too.
cfg = tanh_preset()
s = State(cfg.grid().full(rep.mu_s), rep.rho_s)
new = step(cfg.grid(), s, StepParams(eps=0.0, delta=cfg.delta, dt=1e-2), cfg.potential())
print("one eps = 0 step from the steady state moves rho by", np.max(np.abs(new.rho - s.rho)))
