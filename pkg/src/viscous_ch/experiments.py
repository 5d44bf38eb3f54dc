"""Batch studies: eps -> 0 sweeps, long-time behaviour, steady states and
manufactured-solution convergence tests."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from . import grid as gr
from . import potential as pot
from .stepper import SolverError, State, StepParams, run, step


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("CHS_THREADS", "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------- eps sweep

@dataclass
class SweepReport:
    eps_values: list
    mu_errors: list
    rho_errors: list
    empirical_rates: list

    def to_csv(self) -> str:
        lines = ["eps,mu_error,rho_error,mu_rate"]
        rates = [float("nan")] + list(self.empirical_rates)
        for e, m, r, k in zip(self.eps_values, self.mu_errors, self.rho_errors, rates):
            lines.append(f"{e:.17g},{m:.17g},{r:.17g},{k:.17g}")
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        out = ["eps sweep against the eps = 0 reference (L2(0,T;L2) errors)"]
        for e, m, r in zip(self.eps_values, self.mu_errors, self.rho_errors):
            out.append(f"  eps = {e:<10.4g} mu_error = {m:.6e}  rho_error = {r:.6e}")
        if self.empirical_rates:
            out.append("  empirical rates: " + ", ".join(f"{k:.3f}" for k in self.empirical_rates))
        return "\n".join(out)


def _trajectory_fields(config, spec):
    mus, rhos = [], []
    for state, _ in run(config, spec):
        mus.append(state.mu)
        rhos.append(state.rho)
    return np.array(mus), np.array(rhos)


def _space_time_l2(grid, dt, a, b):
    # steps 1..N; the initial level is shared
    d = a[1:] - b[1:]
    return float(np.sqrt(dt * grid.cell_volume * np.sum(d * d)))


def eps_sweep(base_config, eps_list, spec=None, workers=None) -> SweepReport:
    """Run every eps in ``eps_list`` and eps = 0 on the same discretisation.

    Errors are discrete L2(0,T;L2) norms of the difference to the eps = 0 run.
    Monotonicity is reported, never enforced.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    spec = base_config.potential() if spec is None else spec
    grid, dt = base_config.grid(), base_config.dt
    configs = [base_config.with_(eps=0.0)] + [base_config.with_(eps=e) for e in eps_list]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_trajectory_fields, configs, [spec] * len(configs)))
    else:
        results = [_trajectory_fields(c, spec) for c in configs]
    mu_ref, rho_ref = results[0]
    mu_err = [_space_time_l2(grid, dt, m, mu_ref) for m, _ in results[1:]]
    rho_err = [_space_time_l2(grid, dt, r, rho_ref) for _, r in results[1:]]
    rates = []
    for k in range(len(eps_list) - 1):
        e0, e1 = mu_err[k], mu_err[k + 1]
        if e0 > 0 and e1 > 0 and eps_list[k + 1] > 0:
            rates.append(float(np.log(e0 / e1) / np.log(eps_list[k] / eps_list[k + 1])))
        else:
            rates.append(float("nan"))
    return SweepReport(eps_list, mu_err, rho_err, rates)


def homogeneous_ode(eps, delta, spec, mu0, rho0, t_final, rtol=1e-12, atol=1e-14):
    """Integrate the spatially homogeneous reduction

        delta rho' = mu - f'(rho),   d/dt[(eps + 2 rho) mu] = mu rho'

    with an 8th order Runge-Kutta method. Returns ``(mu(T), rho(T))``.
    """
    def rhs(t, y):
        mu, rho = y
        drho = (mu - pot.f_prime(spec, rho)) / delta
        return [-mu * drho / (eps + 2.0 * rho), drho]

    sol = solve_ivp(rhs, (0.0, t_final), [mu0, rho0], method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


# --------------------------------------------------------------------------- steady states

def solve_steady(mu_s, spec, grid, initial_guess, tol=1e-10, max_iter=100):
    """Damped Newton for ``-lap rho + f'(rho) = mu_s`` with Neumann conditions.

    ``f`` is not convex, so several solutions can exist; ``initial_guess``
    selects the branch.
    """
    if mu_s < 0:
        raise ValueError("mu_s must be nonnegative")
    x = np.array(initial_guess, dtype=float)
    if not (np.min(x) > 0 and np.max(x) < 1):
        raise ValueError("initial guess must lie in (0, 1)")
    lo, hi = spec.singular_floor, 1.0 - spec.singular_floor
    L = gr.laplacian_matrix(grid)

    def residual(y):
        return -gr.laplacian_neumann(grid, y) + pot.f_prime(spec, y) - mu_s

    g = residual(x)
    gnorm = np.max(np.abs(g))
    for _ in range(max_iter):
        if gnorm <= tol:
            return x
        J = (sp.diags(pot.f_second(spec, x).ravel()) - L).tocsc()
        dx = spla.spsolve(J, -g.ravel()).reshape(grid.shape)
        if not np.all(np.isfinite(dx)):
            raise SolverError("singular Jacobian in steady-state Newton")
        alpha = 1.0
        for _ in range(60):
            trial = x + alpha * dx
            if np.min(trial) >= lo and np.max(trial) <= hi:
                g_trial = residual(trial)
                if np.max(np.abs(g_trial)) < gnorm or alpha < 1e-4:
                    break
            alpha *= 0.5
        else:
            raise SolverError("steady Newton iterate left (0, 1)")
        x, g = trial, g_trial
        gnorm = np.max(np.abs(g))
    if gnorm <= tol:
        return x
    raise SolverError(f"steady Newton did not converge (residual {gnorm:.3e})")


# --------------------------------------------------------------------------- long time

@dataclass
class OmegaReport:
    probe_times: list
    steady_residuals: list
    grad_mu_norms: list
    dt_rho_norms: list
    mu_s: float
    rho_s: np.ndarray
    match_error: float
    stalled: bool
    final: State = None
    penultimate: State = None
    records: list = field(default_factory=list, repr=False)

    def summary(self) -> str:
        out = [f"long-time run: {'stalled' if self.stalled else 'did NOT stall'} at t = {self.final.time:.6g}",
               f"  mu_s = mean mu(T) = {self.mu_s:.12g}",
               f"  match_error vs steady solve = {self.match_error:.3e}"]
        for t, r, g, d in zip(self.probe_times, self.steady_residuals, self.grad_mu_norms, self.dt_rho_norms):
            out.append(f"  t = {t:<10.4g} steady_residual = {r:.3e}  |grad mu| = {g:.3e}  |d_t rho| = {d:.3e}")
        return "\n".join(out)


def long_time(config, t_max, stall_tol, spec=None, t_probe=None) -> OmegaReport:
    """Run until ``t_max`` or until ``|grad mu| + |d_t rho| < stall_tol``.

    Probes are taken at dyadic times ``2**n * t_probe``.  The final rho is
    compared with the steady state for the final mean of mu, found by Newton
    from rho(T).
    """
    spec = config.potential() if spec is None else spec
    grid = config.grid()
    t_probe = config.dt if t_probe is None else t_probe
    next_probe = t_probe
    probes, res, gmu, drho = [], [], [], []
    records = []
    prev = state = None
    stalled = False
    for state, rec in run(config, spec, t_final=t_max):
        records.append(rec)
        if rec.time >= next_probe - 1e-12 * t_max:
            probes.append(rec.time)
            res.append(rec.steady_residual)
            gmu.append(rec.grad_mu_l2)
            drho.append(rec.dt_rho_l2)
            while next_probe <= rec.time + 1e-12 * t_max:
                next_probe *= 2.0
        if len(records) > 1 and rec.grad_mu_l2 + rec.dt_rho_l2 < stall_tol:
            stalled = True
            break
        prev = state
    if not probes or probes[-1] != records[-1].time:
        rec = records[-1]
        probes.append(rec.time)
        res.append(rec.steady_residual)
        gmu.append(rec.grad_mu_l2)
        drho.append(rec.dt_rho_l2)
    mu_s = gr.mean(grid, state.mu)
    try:
        rho_s = solve_steady(max(mu_s, 0.0), spec, grid, state.rho)
        match = gr.l2_norm(grid, state.rho - rho_s)
    except SolverError:
        # far from equilibrium (no stall) the Newton solve may not converge
        if stalled:
            raise
        rho_s, match = np.full(grid.shape, np.nan), float("nan")
    return OmegaReport(probes, res, gmu, drho, mu_s, rho_s, match, stalled, state, prev, records)


# --------------------------------------------------------------------------- manufactured solutions

@dataclass
class Manufactured:
    """Exact pair (mu*, rho*) with time derivatives and Laplacians, 1D."""

    def mu(self, x, t):
        return 2.0 + np.cos(np.pi * x) * np.exp(-t)

    def rho(self, x, t):
        return 0.5 + 0.25 * np.cos(np.pi * x) * np.exp(-t)

    def dt_mu(self, x, t):
        return -np.cos(np.pi * x) * np.exp(-t)

    def dt_rho(self, x, t):
        return -0.25 * np.cos(np.pi * x) * np.exp(-t)

    def lap_mu(self, x, t):
        return -np.pi**2 * np.cos(np.pi * x) * np.exp(-t)

    def lap_rho(self, x, t):
        return -0.25 * np.pi**2 * np.cos(np.pi * x) * np.exp(-t)

    def sources(self, x, t, eps, delta, spec):
        mu, rho = self.mu(x, t), self.rho(x, t)
        s_mu = (eps + 2.0 * rho) * self.dt_mu(x, t) + mu * self.dt_rho(x, t) - self.lap_mu(x, t)
        s_rho = delta * self.dt_rho(x, t) - self.lap_rho(x, t) + pot.f_prime(spec, rho) - mu
        return s_mu, s_rho


@dataclass
class SteadyExact(Manufactured):
    """Constant steady pair: rho* = rho_bar, mu* = f'(rho_bar); needs no forcing."""

    rho_bar: float = 0.5
    mu_bar: float = 0.0

    def mu(self, x, t):
        return np.full_like(x, self.mu_bar)

    def rho(self, x, t):
        return np.full_like(x, self.rho_bar)

    def sources(self, x, t, eps, delta, spec):
        return None


def mms_error(cells, dt, t_final, spec, eps=0.1, delta=1.0, exact=None, extent=1.0):
    """Final-time L2 errors ``(mu_err, rho_err)`` of a forced run on ``cells`` cells."""
    exact = Manufactured() if exact is None else exact
    grid = gr.line(cells, extent)
    x = grid.centers()[0]
    params = StepParams(eps=eps, delta=delta, dt=dt)
    state = State(exact.mu(x, 0.0), exact.rho(x, 0.0), 0.0)
    nsteps = int(round(t_final / dt))
    for n in range(1, nsteps + 1):
        t = n * dt
        src = exact.sources(x, t, eps, delta, spec)
        state = step(grid, state, params, spec, sources=src, check=False)
    t = nsteps * dt
    return (gr.l2_norm(grid, state.mu - exact.mu(x, t)), gr.l2_norm(grid, state.rho - exact.rho(x, t)))


def fitted_order(sizes, errors) -> float:
    """Least-squares slope of log(error) against log(size)."""
    slope, _ = np.polyfit(np.log(sizes), np.log(errors), 1)
    return float(slope)


@dataclass
class MMSReport:
    cells: list
    space_errors: list
    dts: list
    time_errors: list
    space_order_mu: float
    space_order_rho: float
    time_order_mu: float
    time_order_rho: float

    @property
    def space_order(self) -> float:
        return min(self.space_order_mu, self.space_order_rho)

    @property
    def time_order(self) -> float:
        return min(self.time_order_mu, self.time_order_rho)

    def to_csv(self) -> str:
        lines = ["study,level,mu_error,rho_error"]
        lines += [f"space,{n},{m:.17g},{r:.17g}" for n, (m, r) in zip(self.cells, self.space_errors)]
        lines += [f"time,{dt!r},{m:.17g},{r:.17g}" for dt, (m, r) in zip(self.dts, self.time_errors)]
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        return (f"manufactured solution: space order mu {self.space_order_mu:.3f}, rho {self.space_order_rho:.3f}; "
                f"time order mu {self.time_order_mu:.3f}, rho {self.time_order_rho:.3f}")


def mms_convergence(spec, refinement_levels=(16, 32, 64), dt_levels=(0.04, 0.02, 0.01),
                    eps=0.1, delta=1.0, space_dt=None, space_t_final=0.1,
                    time_cells=None, time_t_final=1.0) -> MMSReport:
    """Observed orders in space (tiny dt) and time (fine grid)."""
    if len(refinement_levels) < 3 or len(dt_levels) < 3:
        raise ValueError("need at least 3 refinement levels")
    space_dt = 2e-5 if space_dt is None else space_dt
    time_cells = 4 * max(refinement_levels) if time_cells is None else time_cells
    s_err = [mms_error(n, space_dt, space_t_final, spec, eps, delta) for n in refinement_levels]
    t_err = [mms_error(time_cells, dt, time_t_final, spec, eps, delta) for dt in dt_levels]
    h = [1.0 / n for n in refinement_levels]
    return MMSReport(
        list(refinement_levels), s_err, list(dt_levels), t_err,
        fitted_order(h, [e[0] for e in s_err]), fitted_order(h, [e[1] for e in s_err]),
        fitted_order(dt_levels, [e[0] for e in t_err]), fitted_order(dt_levels, [e[1] for e in t_err]),
    )
