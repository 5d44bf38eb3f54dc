import math

import numpy as np
import pytest

from viscous_ch import diagnostics as dg
from viscous_ch import grid as gr
from viscous_ch.config import SimConfig, tanh_preset
from viscous_ch.experiments import solve_steady
from viscous_ch.stepper import State, simulate


def test_lyapunov_examples(spec):
    g = gr.line(10)
    assert dg.lyapunov_E(g, State(g.full(0.0), g.full(0.4)), 0.3) == 0.0
    assert dg.lyapunov_E(g, State(g.full(1.0), g.full(0.5)), 0.0) == pytest.approx(0.5)


def test_lyapunov_tiny_oracle(tiny):
    rng = np.random.default_rng(5)
    mu, rho, eps = rng.uniform(0, 2, 3), rng.uniform(0.1, 0.9, 3), 0.07
    total = 0.0
    for i in range(3):
        total += (eps / 2 * mu[i] ** 2 + rho[i] * mu[i] ** 2) * 1.0
    assert dg.lyapunov_E(tiny, State(mu, rho), eps) == pytest.approx(total, rel=1e-12)


def test_free_energy(spec, tiny):
    g = gr.line(7)
    F = dg.free_energy_F(g, State(g.full(0.0), g.full(0.5)), spec)
    assert F == pytest.approx(0.05685281944005469, rel=1e-12)  # ln 0.5 + 3/4 via mpmath
    assert gr.h1_seminorm(g, g.full(0.5)) == 0.0
    rho = np.array([0.2, 0.6, 0.3])
    f = lambda r: r * math.log(r) + (1 - r) * math.log(1 - r) + 3 * r * (1 - r)
    want = 0.5 * ((0.6 - 0.2) ** 2 + (0.3 - 0.6) ** 2) + sum(f(r) for r in rho)
    assert dg.free_energy_F(tiny, State(np.zeros(3), rho), spec) == pytest.approx(want, rel=1e-12)


def test_steady_residual(spec):
    g = gr.line(9)
    assert dg.steady_residual(g, State(g.full(0.0), g.full(0.5)), spec) == 0.0
    r = dg.steady_residual(g, State(g.full(0.0), g.full(0.3)), spec)
    assert r == pytest.approx(0.3527021396127964, rel=1e-12)
    x = g.centers()[0]
    guess = 0.5 + 0.3 * np.cos(np.pi * x)
    rho_s = solve_steady(0.1, spec, g, guess)
    assert dg.steady_residual(g, State(g.full(0.1), rho_s), spec) < 1e-8


def test_dissipation_trivial_cases():
    cfg = SimConfig(cells=(16,), dt=0.01, t_final=0.2, mu0="homogeneous(0.0)", rho0="tanh_profile(0.5, 0.1, 0.3, 0.6)")
    assert dg.dissipation_residual(simulate(cfg).records) == 0.0
    cfg = SimConfig(cells=(16,), dt=0.01, t_final=0.2, mu0="homogeneous(0.0)", rho0="homogeneous(0.5)")
    assert dg.dissipation_residual(simulate(cfg).records) == 0.0
    with pytest.raises(ValueError):
        dg.dissipation_residual(simulate(cfg).records[:1])


def test_dissipation_first_order():
    res = [dg.dissipation_residual(simulate(tanh_preset(0.05, dt=dt, t_final=0.5)).records) for dt in (2e-3, 1e-3)]
    assert 1.5 <= res[0] / res[1] <= 3


def test_energy_monotone_and_balances():
    tr = simulate(tanh_preset(0.1, dt=2e-3, t_final=0.5))
    E0 = tr.records[0].lyapunov_E
    assert dg.lyapunov_drift(tr.records) <= 1e-8 * (1 + E0)
    dF = abs(tr.records[-1].free_energy_F - tr.records[0].free_energy_F)
    assert dg.free_energy_residual(tr.records, 0.5) < 0.2 * dF
    g, s = tr.grid, tr.final
    assert tr.records[-1].min_rho == np.min(s.rho)
    assert tr.records[-1].mean_mu == pytest.approx(gr.mean(g, s.mu))


def test_csv_layout():
    tr = simulate(SimConfig(cells=(8,), dt=0.05, t_final=0.1, rho0="homogeneous(0.4)", mu0="homogeneous(1.0)"))
    text = dg.to_csv(tr.records)
    lines = text.splitlines()
    assert lines[0] == "time,E,F,grad_mu_l2,dt_rho_l2,min_mu,min_rho,max_rho,mean_mu,var_mu,steady_residual"
    assert len(lines) == 4
    assert float(lines[1].split(",")[1]) == tr.records[0].lyapunov_E
