"""Semi-implicit time stepping for the viscous Cahn-Hilliard system

    (eps + 2 rho) d_t mu + mu d_t rho - lap mu = 0,
    delta d_t rho - lap rho + f'(rho) = mu,

with homogeneous Neumann conditions, for eps >= 0.

Each step first advances rho (f1' implicit, f2' explicit), then advances mu
through the conservative form d_t(eps mu + 2 mu rho) - lap mu = mu d_t rho.
Discretised with u = (eps + 2 rho) mu this collapses to a Helmholtz problem
with coefficient (eps + rho' + rho)/dt, which stays positive at eps = 0 as
long as rho is bounded away from zero.  Positivity of mu then follows from
the M-matrix property of the linear system.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from . import diagnostics
from . import grid as gr
from . import potential as pot
from .grid import Grid, LinearSolverError


class SolverError(RuntimeError):
    """Newton or linear solver failure inside a step."""


class InvariantViolation(RuntimeError):
    """A structural invariant (positivity, barrier, upper bound) failed."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class State:
    mu: np.ndarray
    rho: np.ndarray
    time: float = 0.0

    def u(self, eps: float) -> np.ndarray:
        """Auxiliary variable eps*mu + 2*mu*rho."""
        return (eps + 2.0 * self.rho) * self.mu


@dataclass(frozen=True)
class StepParams:
    eps: float
    delta: float = 1.0
    dt: float = 1e-3
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    linear_tol: float = 1e-10
    linear_method: str = "auto"

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")


def _newton_monotone(grid, spec, c, b, x0, tol, max_iter, linear_method="auto"):
    """Solve c*x - lap(x) + f1'(x) = b for x in (0, 1).

    The operator is strictly monotone (c >= 0, f1 convex), so each Jacobian
    diag(c + f1''(x)) - lap is an M-matrix.  Steps are halved until the
    iterate lies inside [floor, 1 - floor].
    """
    lo, hi = spec.singular_floor, 1.0 - spec.singular_floor
    x = np.array(x0, dtype=float)

    def residual(y):
        return c * y - gr.laplacian_neumann(grid, y) + pot.f1_prime(spec, y) - b

    g = residual(x)
    gnorm = np.max(np.abs(g))
    for it in range(max_iter + 1):
        if gnorm <= tol:
            return x
        if it == max_iter:
            break
        jac_diag = c + pot.f1_second(spec, x)
        dx = gr.solve_helmholtz(grid, jac_diag, -g, tol=min(1e-12, tol), method=linear_method)
        alpha = 1.0
        for _ in range(60):
            trial = x + alpha * dx
            if np.min(trial) >= lo and np.max(trial) <= hi:
                g_trial = residual(trial)
                if np.max(np.abs(g_trial)) < gnorm or alpha < 1e-3:
                    break
            alpha *= 0.5
        else:
            raise SolverError("Newton iterate left (0, 1) after 60 halvings; reduce dt")
        x, g = trial, g_trial
        gnorm = np.max(np.abs(g))
    raise SolverError(f"Newton did not converge in {max_iter} iterations (residual {gnorm:.3e})")


def step_rho(grid: Grid, state: State, params: StepParams, spec: pot.PotentialSpec,
             source: Optional[np.ndarray] = None) -> np.ndarray:
    """Order parameter at the next level.

    Solves ``delta (rho' - rho)/dt - lap rho' + f1'(rho') = mu - f2'(rho)``.
    """
    c = params.delta / params.dt
    b = c * state.rho + state.mu - pot.f2_prime(spec, state.rho)
    if source is not None:
        b = b + source
    return _newton_monotone(grid, spec, c, b, state.rho, params.newton_tol,
                            params.newton_max_iter, params.linear_method)


def step_mu(grid: Grid, state: State, rho_next: np.ndarray, params: StepParams,
            source: Optional[np.ndarray] = None) -> np.ndarray:
    """Chemical potential at the next level from the conservative form.

    ``(u' - u)/dt - lap mu' = mu' (rho' - rho)/dt`` with ``u' = (eps + 2 rho') mu'``
    is exactly ``((eps + rho' + rho)/dt) mu' - lap mu' = u/dt``.
    """
    a = (params.eps + rho_next + state.rho) / params.dt
    rhs = state.u(params.eps) / params.dt
    if source is not None:
        rhs = rhs + source
    try:
        return gr.solve_helmholtz(grid, a, rhs, tol=params.linear_tol, method=params.linear_method)
    except LinearSolverError as exc:
        raise SolverError(str(exc)) from exc


def check_invariants(state: State, spec: pot.PotentialSpec, barrier: Optional[float],
                     mu_tol: float = 1e-12, barrier_tol: float = 1e-10) -> None:
    if np.min(state.mu) < -mu_tol:
        raise InvariantViolation(f"t={state.time:.6g}: min(mu) = {np.min(state.mu):.3e} < 0", state)
    if barrier is not None and np.min(state.rho) < barrier - barrier_tol:
        raise InvariantViolation(
            f"t={state.time:.6g}: min(rho) = {np.min(state.rho):.17g} below barrier {barrier:.17g}", state)
    if np.max(state.rho) > 1.0 - spec.singular_floor:
        raise InvariantViolation(f"t={state.time:.6g}: max(rho) = {np.max(state.rho):.17g} too close to 1", state)


def step(grid: Grid, state: State, params: StepParams, spec: pot.PotentialSpec,
         barrier: Optional[float] = None, sources=None, check: bool = True) -> State:
    """One full step: rho first, then mu.

    ``sources`` is an optional pair ``(s_mu, s_rho)`` of forcing fields at the
    new time level (used by manufactured-solution tests).
    """
    s_mu, s_rho = sources if sources is not None else (None, None)
    rho_next = step_rho(grid, state, params, spec, s_rho)
    mu_next = step_mu(grid, state, rho_next, params, s_mu)
    new = State(mu_next, rho_next, state.time + params.dt)
    if check:
        check_invariants(new, spec, barrier)
    return new


def mollify_initial_rho(grid: Grid, rho0_raw, eps: float, spec: pot.PotentialSpec,
                        tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
    """Regularise rough initial data by solving
    ``(x - rho0)/eps - lap x + f1'(x) = 0`` with Neumann conditions."""
    if not eps > 0:
        raise ValueError("mollifier needs eps > 0")
    rho0_raw = np.asarray(rho0_raw, dtype=float)
    if not (np.min(rho0_raw) > 0 and np.max(rho0_raw) < 1):
        raise ValueError("rho0 must lie strictly inside (0, 1)")
    c = 1.0 / eps
    return _newton_monotone(grid, spec, c, c * rho0_raw, rho0_raw, tol, max_iter)


@dataclass
class Trajectory:
    grid: Grid
    params: StepParams
    barrier: float
    records: list
    snapshots: list
    final: State


def validate_initial(state: State) -> None:
    if np.min(state.mu) < 0:
        raise ValueError("initial mu must be nonnegative")
    if not (np.min(state.rho) > 0 and np.max(state.rho) < 1):
        raise ValueError("initial rho must lie strictly inside (0, 1)")
    if not np.all(np.isfinite(state.mu)) or not np.all(np.isfinite(state.rho)):
        raise ValueError("initial data must be finite")


def run(config, spec: Optional[pot.PotentialSpec] = None, t_final: Optional[float] = None,
        initial: Optional[State] = None) -> Iterator[tuple[State, "diagnostics.DiagnosticsRecord"]]:
    """Advance ``config`` from t = 0 and yield ``(state, record)`` after every step.

    The first item is the initial state.  ``t_final`` overrides the config.
    """
    spec = config.potential() if spec is None else spec
    grid = config.grid()
    params = config.step_params()
    state = config.initial_state() if initial is None else initial
    validate_initial(state)
    barrier = pot.lower_barrier(spec, float(np.min(state.rho)))
    t_end = config.t_final if t_final is None else t_final
    nsteps = int(round((t_end - state.time) / params.dt))
    yield state, diagnostics.record(grid, state, None, params, spec)
    t0 = state.time
    for n in range(1, nsteps + 1):
        new = step(grid, state, params, spec, barrier)
        # accumulate time as t0 + n*dt, not by repeated addition
        new = State(new.mu, new.rho, t0 + n * params.dt)
        yield new, diagnostics.record(grid, new, state, params, spec)
        state = new


def simulate(config, spec: Optional[pot.PotentialSpec] = None, t_final: Optional[float] = None,
             initial: Optional[State] = None) -> Trajectory:
    """Collect :func:`run` into a :class:`Trajectory`, keeping snapshots on the configured stride."""
    spec = config.potential() if spec is None else spec
    initial = config.initial_state() if initial is None else initial
    stride = config.snapshot_stride
    records, snaps = [], []
    for n, (state, rec) in enumerate(run(config, spec, t_final, initial)):
        records.append(rec)
        if stride and n % stride == 0:
            snaps.append(state)
    barrier = pot.lower_barrier(spec, float(np.min(initial.rho)))
    return Trajectory(config.grid(), config.step_params(), barrier, records, snaps, state)
