"""Discrete energies, residuals and per-step records.

Two functionals are tracked:

* the Lyapunov functional ``E = int (eps/2) mu^2 + rho mu^2``, dissipated at
  rate ``||grad mu||^2``;
* the free energy ``F = 1/2 ||grad rho||^2 + int f(rho)``, whose balance
  involves the viscous term ``delta ||d_t rho||^2`` and the work
  ``int mu d_t rho``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import grid as gr
from . import potential as pot

CSV_COLUMNS = ("time", "E", "F", "grad_mu_l2", "dt_rho_l2", "min_mu", "min_rho", "max_rho",
               "mean_mu", "var_mu", "steady_residual")


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    lyapunov_E: float
    free_energy_F: float
    grad_mu_l2: float
    dt_rho_l2: float
    min_mu: float
    min_rho: float
    max_rho: float
    mean_mu: float
    spatial_var_mu: float
    steady_residual: float
    # int mu^{n-1} (rho^n - rho^{n-1})/dt, the work term of the free-energy balance
    power: float = 0.0

    def csv_row(self) -> list[str]:
        values = (self.time, self.lyapunov_E, self.free_energy_F, self.grad_mu_l2, self.dt_rho_l2,
                  self.min_mu, self.min_rho, self.max_rho, self.mean_mu, self.spatial_var_mu,
                  self.steady_residual)
        return [f"{v:.17g}" for v in values]


def lyapunov_E(grid, state, eps: float) -> float:
    mu2 = np.square(state.mu)
    return gr.integrate(grid, 0.5 * eps * mu2 + state.rho * mu2)


def free_energy_F(grid, state, spec: pot.PotentialSpec) -> float:
    return 0.5 * gr.h1_seminorm(grid, state.rho) ** 2 + gr.integrate(grid, pot.f(spec, state.rho))


def steady_residual(grid, state, spec: pot.PotentialSpec) -> float:
    """``||-lap rho + f'(rho) - mean(mu)|| + ||grad mu||``; zero exactly at a
    discrete steady state with constant mu."""
    r = -gr.laplacian_neumann(grid, state.rho) + pot.f_prime(spec, state.rho) - gr.mean(grid, state.mu)
    return gr.l2_norm(grid, r) + gr.h1_seminorm(grid, state.mu)


def record(grid, state, previous, params, spec) -> DiagnosticsRecord:
    """Diagnostics at ``state``; ``previous`` is the state one step earlier (None at t = 0).

    d_t rho is the backward difference of the two levels.
    """
    if previous is None:
        dt_rho_l2 = power = 0.0
    else:
        dt = state.time - previous.time
        dt_rho = (state.rho - previous.rho) / dt
        dt_rho_l2 = gr.l2_norm(grid, dt_rho)
        power = gr.integrate(grid, previous.mu * dt_rho)
    return DiagnosticsRecord(
        time=float(state.time),
        lyapunov_E=lyapunov_E(grid, state, params.eps),
        free_energy_F=free_energy_F(grid, state, spec),
        grad_mu_l2=gr.h1_seminorm(grid, state.mu),
        dt_rho_l2=dt_rho_l2,
        min_mu=float(np.min(state.mu)),
        min_rho=float(np.min(state.rho)),
        max_rho=float(np.max(state.rho)),
        mean_mu=gr.mean(grid, state.mu),
        spatial_var_mu=gr.spatial_variance(grid, state.mu),
        steady_residual=steady_residual(grid, state, spec),
        power=power,
    )


def _steps(records):
    t = np.array([r.time for r in records])
    return np.diff(t)


def dissipation_residual(records) -> float:
    """``|E(t_n) + sum_k dt ||grad mu(t_k)||^2 - E(0)|`` over the given prefix."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    dts = _steps(records)
    grad2 = np.array([r.grad_mu_l2 for r in records[1:]]) ** 2
    return abs(records[-1].lyapunov_E + float(np.sum(dts * grad2)) - records[0].lyapunov_E)


def free_energy_residual(records, delta: float) -> float:
    """``|F(t_n) + delta sum dt ||d_t rho||^2 - F(0) - sum dt int mu d_t rho|``."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    dts = _steps(records)
    visc = np.array([r.dt_rho_l2 for r in records[1:]]) ** 2
    work = np.array([r.power for r in records[1:]])
    return abs(records[-1].free_energy_F + delta * float(np.sum(dts * visc))
               - records[0].free_energy_F - float(np.sum(dts * work)))


def lyapunov_drift(records) -> float:
    """Largest increase of E between consecutive records (0 if E never grows)."""
    E = np.array([r.lyapunov_E for r in records])
    return float(max(0.0, np.max(np.diff(E)))) if E.size > 1 else 0.0


def tail_partial_sums(records, fraction: float = 0.25):
    """Change of ``sum dt ||grad mu||^2`` and ``sum dt ||d_t rho||^2`` over the
    final ``fraction`` of the records."""
    n = len(records)
    start = max(1, n - int(np.ceil(fraction * (n - 1))))
    tail = records[start - 1:]
    dts = _steps(tail)
    g = np.array([r.grad_mu_l2 for r in tail[1:]]) ** 2
    d = np.array([r.dt_rho_l2 for r in tail[1:]]) ** 2
    return float(np.sum(dts * g)), float(np.sum(dts * d))


def to_csv(records, stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue() if stream is None else ""
