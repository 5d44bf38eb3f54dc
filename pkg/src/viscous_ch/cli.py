"""Command-line front end.

    python -m viscous_ch run CONFIG
    python -m viscous_ch sweep-eps CONFIG --eps 0.1,0.05,0.025,0.0125
    python -m viscous_ch long-time CONFIG --t-max 200 --stall-tol 1e-6
    python -m viscous_ch mms [--config CONFIG] --levels 16,32,64
    python -m viscous_ch steady CONFIG --mu-s 0.0 --guess 0.3
    python -m viscous_ch mollify CONFIG --eps 0.01

Exit codes: 0 success, 2 invalid configuration, 3 solver failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import diagnostics
from . import experiments as ex
from . import grid as gr
from .grid import LinearSolverError
from .stepper import InvariantViolation, SolverError, mollify_initial_rho, run

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
SOLVER_ERRORS = (SolverError, InvariantViolation, LinearSolverError, FloatingPointError)


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _prepare(args):
    cfg = cfgmod.parse_config(args.config)
    if args.out:
        cfg = cfg.with_(output_dir=args.out)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config").write_text(cfgmod.dump_config(cfg))
    return cfg, out


def cmd_run(args):
    cfg, out = _prepare(args)
    grid = cfg.grid()
    stride = cfg.snapshot_stride
    write_snaps = "snapshots" in cfg.formats
    with open(out / "diagnostics.csv", "w", newline="") as fh:
        fh.write(",".join(diagnostics.CSV_COLUMNS) + "\n")
        last = None
        try:
            for n, (state, rec) in enumerate(run(cfg)):
                fh.write(",".join(rec.csv_row()) + "\n")
                if write_snaps and stride and n % stride == 0:
                    gr.write_snapshot(out / f"mu_{n:06d}.txt", grid, state.mu, state.time)
                    gr.write_snapshot(out / f"rho_{n:06d}.txt", grid, state.rho, state.time)
                last = (n, state, rec)
        except SOLVER_ERRORS as exc:
            fh.write(f"FAILED: {exc}\n")
            (out / "report.txt").write_text(f"FAILED: {exc}\n")
            raise
    n, state, rec = last
    if write_snaps:
        gr.write_snapshot(out / "mu_final.txt", grid, state.mu, state.time)
        gr.write_snapshot(out / "rho_final.txt", grid, state.rho, state.time)
    (out / "report.txt").write_text(
        f"run finished: {n} steps, t = {state.time:.17g}\n"
        f"E = {rec.lyapunov_E:.17g}\nF = {rec.free_energy_F:.17g}\n"
        f"min mu = {rec.min_mu:.17g}\nmin rho = {rec.min_rho:.17g}\nmax rho = {rec.max_rho:.17g}\n"
        f"steady residual = {rec.steady_residual:.17g}\n")
    return EXIT_OK


def cmd_sweep(args):
    cfg, out = _prepare(args)
    try:
        rep = ex.eps_sweep(cfg, _floats(args.eps))
    except SOLVER_ERRORS as exc:
        (out / "report.txt").write_text(f"FAILED: {exc}\n")
        raise
    (out / "sweep.csv").write_text(rep.to_csv())
    (out / "report.txt").write_text(rep.summary() + "\n")
    return EXIT_OK


def cmd_long_time(args):
    cfg, out = _prepare(args)
    try:
        rep = ex.long_time(cfg, args.t_max, args.stall_tol)
    except SOLVER_ERRORS as exc:
        (out / "report.txt").write_text(f"FAILED: {exc}\n")
        raise
    grid = cfg.grid()
    (out / "diagnostics.csv").write_text(diagnostics.to_csv(rep.records))
    gr.write_snapshot(out / "mu_final.txt", grid, rep.final.mu, rep.final.time)
    gr.write_snapshot(out / "rho_final.txt", grid, rep.final.rho, rep.final.time)
    if np.all(np.isfinite(rep.rho_s)):
        gr.write_snapshot(out / "rho_steady.txt", grid, rep.rho_s, rep.final.time)
    (out / "report.txt").write_text(rep.summary() + "\n")
    return EXIT_OK


def cmd_mms(args):
    if args.config:
        cfg = cfgmod.parse_config(args.config)
        spec, eps, delta = cfg.potential(), cfg.eps, cfg.delta
        out = Path(args.out or cfg.output_dir)
    else:
        spec, eps, delta = cfgmod.SimConfig().potential(), 0.1, 1.0
        out = Path(args.out or "output")
    out.mkdir(parents=True, exist_ok=True)
    rep = ex.mms_convergence(spec, _ints(args.levels), _floats(args.dt_levels), eps=eps, delta=delta)
    (out / "mms.csv").write_text(rep.to_csv())
    (out / "report.txt").write_text(rep.summary() + "\n")
    return EXIT_OK


def _guess(text, grid):
    try:
        return grid.full(float(text))
    except ValueError:
        return cfgmod.evaluate_preset(text, grid)


def cmd_steady(args):
    cfg, out = _prepare(args)
    grid = cfg.grid()
    try:
        rho_s = ex.solve_steady(args.mu_s, cfg.potential(), grid, _guess(args.guess, grid))
    except SOLVER_ERRORS as exc:
        (out / "report.txt").write_text(f"FAILED: {exc}\n")
        raise
    gr.write_snapshot(out / "rho_steady.txt", grid, rho_s, 0.0)
    (out / "report.txt").write_text(
        f"steady state for mu_s = {args.mu_s!r}: min rho = {np.min(rho_s):.17g}, max rho = {np.max(rho_s):.17g}\n")
    return EXIT_OK


def cmd_mollify(args):
    cfg, out = _prepare(args)
    grid = cfg.grid()
    raw = cfgmod.evaluate_preset(cfg.rho0, grid)
    try:
        rho = mollify_initial_rho(grid, raw, args.eps, cfg.potential())
    except SOLVER_ERRORS as exc:
        (out / "report.txt").write_text(f"FAILED: {exc}\n")
        raise
    gr.write_snapshot(out / "rho0_mollified.txt", grid, rho, 0.0)
    (out / "report.txt").write_text(
        f"mollified rho0 with eps = {args.eps!r}: L2 change = {gr.l2_norm(grid, rho - raw):.17g}\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="viscous-ch", description="Viscous Cahn-Hilliard simulator")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="INI configuration file")
        s.add_argument("--out", help="override [output] directory")
        s.set_defaults(func=func)
        return s

    with_config("run", cmd_run, "simulate and write diagnostics.csv and snapshots")
    s = with_config("sweep-eps", cmd_sweep, "eps -> 0 convergence sweep")
    s.add_argument("--eps", default="0.1,0.05,0.025,0.0125", help="comma-separated, strictly decreasing")
    s = with_config("long-time", cmd_long_time, "run to stall and compare with a steady state")
    s.add_argument("--t-max", type=float, default=100.0)
    s.add_argument("--stall-tol", type=float, default=1e-6)
    s = with_config("steady", cmd_steady, "solve -lap rho + f'(rho) = mu_s")
    s.add_argument("--mu-s", type=float, default=0.0)
    s.add_argument("--guess", default="0.5", help="constant or preset expression")
    s = with_config("mollify", cmd_mollify, "regularise the configured rho0")
    s.add_argument("--eps", type=float, required=True)
    s = sub.add_parser("mms", help="manufactured-solution order study")
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--levels", default="16,32,64")
    s.add_argument("--dt-levels", default="0.02,0.01,0.005")
    s.set_defaults(func=cmd_mms)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
