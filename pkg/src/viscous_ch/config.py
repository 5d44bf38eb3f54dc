"""Simulation configuration, initial-data presets and INI parsing.

A config file is INI-style (``key = value`` in sections)::

    [grid]
    dim = 1
    cells = 128
    extent = 1.0

    [physics]
    eps = 0.05
    delta = 1.0
    lambda = 3.0

    [time]
    t_final = 1.0
    # dt defaults to delta / (4 lambda)

    [initial]
    rho0 = tanh_profile(0.5, 0.1, 0.2, 0.8)
    mu0 = homogeneous(0.5)

Presets: ``homogeneous(value)``, ``tanh_profile(center, width, low, high)``
and ``random_band(seed, lo, hi)``.  Profiles vary along the first axis.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import potential as pot
from .grid import Grid
from .stepper import State, StepParams, mollify_initial_rho

PRESETS = {"homogeneous": 1, "tanh_profile": 4, "random_band": 3}
_PRESET_RE = re.compile(r"^\s*([a-z_]+)\s*\((.*)\)\s*$")


class ConfigError(ValueError):
    """Validation failure; ``errors`` lists every problem as ``section.key: message``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of the SplitMix64 generator seeded with ``seed``."""
    with np.errstate(over="ignore"):
        k = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(seed % 2**64) + k * np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def uniform01(seed: int, n: int) -> np.ndarray:
    """Doubles in [0, 1) from the top 53 bits of SplitMix64."""
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def parse_preset(text: str):
    m = _PRESET_RE.match(text)
    if not m or m.group(1) not in PRESETS:
        raise ValueError(f"unknown preset {text!r}; expected one of {', '.join(PRESETS)}")
    name = m.group(1)
    args = [a.strip() for a in m.group(2).split(",") if a.strip()]
    if len(args) != PRESETS[name]:
        raise ValueError(f"{name} takes {PRESETS[name]} arguments, got {len(args)}")
    if name == "random_band":
        return name, (int(args[0]), float(args[1]), float(args[2]))
    return name, tuple(float(a) for a in args)


def preset_bounds(text: str) -> tuple[float, float]:
    """Nominal range of values a preset can produce."""
    name, args = parse_preset(text)
    if name == "homogeneous":
        return args[0], args[0]
    if name == "tanh_profile":
        return min(args[2], args[3]), max(args[2], args[3])
    return args[1], args[2]


def evaluate_preset(text: str, grid: Grid) -> np.ndarray:
    name, args = parse_preset(text)
    if name == "homogeneous":
        return grid.full(args[0])
    if name == "tanh_profile":
        center, width, low, high = args
        x = grid.centers()[0]
        return low + 0.5 * (high - low) * (1.0 + np.tanh((x - center) / width))
    seed, lo, hi = args
    return (lo + (hi - lo) * uniform01(seed, grid.size)).reshape(grid.shape)


@dataclass(frozen=True)
class SimConfig:
    cells: tuple = (128,)
    extent: tuple = (1.0,)
    eps: float = 0.05
    delta: float = 1.0
    lam: float = 3.0
    dt: float = None
    t_final: float = 1.0
    snapshot_stride: int = 0
    rho0: str = "tanh_profile(0.5, 0.1, 0.2, 0.8)"
    mu0: str = "homogeneous(0.5)"
    mollify_eps: float = 0.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 50
    linear_tol: float = 1e-10
    linear_method: str = "auto"
    output_dir: str = "output"
    formats: tuple = ("csv", "snapshots")

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in np.atleast_1d(self.cells)))
        object.__setattr__(self, "extent", tuple(float(e) for e in np.atleast_1d(self.extent)))
        if len(self.extent) == 1 and len(self.cells) > 1:
            object.__setattr__(self, "extent", self.extent * len(self.cells))
        object.__setattr__(self, "formats", tuple(self.formats))
        if self.dt is None:
            object.__setattr__(self, "dt", default_dt(self.delta, self.lam))

    @property
    def dim(self) -> int:
        return len(self.cells)

    def grid(self) -> Grid:
        return Grid(self.cells, self.extent)

    def potential(self) -> pot.PotentialSpec:
        return pot.PotentialSpec(lam=self.lam)

    def step_params(self) -> StepParams:
        return StepParams(eps=self.eps, delta=self.delta, dt=self.dt, newton_tol=self.newton_tol,
                          newton_max_iter=self.newton_max_iter, linear_tol=self.linear_tol,
                          linear_method=self.linear_method)

    def initial_state(self) -> State:
        g = self.grid()
        rho = evaluate_preset(self.rho0, g)
        if self.mollify_eps > 0:
            rho = mollify_initial_rho(g, rho, self.mollify_eps, self.potential())
        return State(evaluate_preset(self.mu0, g), rho, 0.0)

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


def default_dt(delta: float, lam: float) -> float:
    # explicit f2' heuristic dt <= delta/(4 lam); lam = 0 has no such limit
    return delta / (4.0 * lam) if lam > 0 else delta / 4.0


# (section, key) -> (field name, converter)
_SCHEMA = {
    ("grid", "dim"): ("dim", int),
    ("grid", "cells"): ("cells", lambda s: tuple(int(x) for x in s.split(","))),
    ("grid", "extent"): ("extent", lambda s: tuple(float(x) for x in s.split(","))),
    ("physics", "eps"): ("eps", float),
    ("physics", "delta"): ("delta", float),
    ("physics", "lambda"): ("lam", float),
    ("time", "dt"): ("dt", float),
    ("time", "t_final"): ("t_final", float),
    ("time", "snapshot_stride"): ("snapshot_stride", int),
    ("initial", "rho0"): ("rho0", str),
    ("initial", "mu0"): ("mu0", str),
    ("initial", "mollify_eps"): ("mollify_eps", float),
    ("solver", "newton_tol"): ("newton_tol", float),
    ("solver", "newton_max_iter"): ("newton_max_iter", int),
    ("solver", "linear_tol"): ("linear_tol", float),
    ("solver", "linear_method"): ("linear_method", str),
    ("output", "directory"): ("output_dir", str),
    ("output", "formats"): ("formats", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
}
_REQUIRED = {("grid", "cells"), ("initial", "rho0"), ("initial", "mu0")}


def parse_config_text(text: str) -> SimConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"syntax: {exc}"]) from exc
    errors, values = [], {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            if (section, key) not in _SCHEMA:
                errors.append(f"{section}.{key}: unknown key")
                continue
            name, conv = _SCHEMA[(section, key)]
            try:
                values[name] = conv(raw)
            except ValueError:
                errors.append(f"{section}.{key}: cannot parse {raw!r}")
    for section, key in sorted(_REQUIRED):
        if not cp.has_option(section, key):
            errors.append(f"{section}.{key}: missing required key")
    dim = values.pop("dim", None)
    if errors:
        raise ConfigError(errors)
    if "extent" not in values:
        values["extent"] = (1.0,) * len(values["cells"])
    if dim is not None and dim != len(values["cells"]):
        errors.append(f"grid.dim: dim = {dim} but {len(values['cells'])} cell counts given")
    try:
        cfg = SimConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(errors + [f"config: {exc}"]) from exc
    errors += validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def parse_config(path) -> SimConfig:
    return parse_config_text(Path(path).read_text())


def validate(cfg: SimConfig) -> list[str]:
    """Every invariant violation of ``cfg``, as ``section.key: message`` strings."""
    errors = []
    grid_ok = cfg.dim in (1, 2) and min(cfg.cells) >= 3 and len(cfg.extent) == cfg.dim and min(cfg.extent) > 0
    if cfg.dim not in (1, 2):
        errors.append("grid.cells: only 1D and 2D grids are supported")
    if min(cfg.cells) < 3:
        errors.append("grid.cells: need at least 3 cells per axis")
    if len(cfg.extent) != cfg.dim:
        errors.append("grid.extent: one extent per axis required")
    elif min(cfg.extent) <= 0:
        errors.append("grid.extent: must be positive")
    if not 0.0 <= cfg.eps <= 1.0:
        errors.append("physics.eps: must lie in [0, 1]")
    if not cfg.delta > 0:
        errors.append("physics.delta: must be positive")
    if cfg.lam < 0:
        errors.append("physics.lambda: must be nonnegative")
    if not cfg.dt > 0:
        errors.append("time.dt: must be positive")
    if not cfg.t_final > 0:
        errors.append("time.t_final: must be positive")
    if cfg.snapshot_stride < 0:
        errors.append("time.snapshot_stride: must be nonnegative")
    if cfg.mollify_eps < 0:
        errors.append("initial.mollify_eps: must be nonnegative")
    if not cfg.newton_tol > 0 or not cfg.linear_tol > 0:
        errors.append("solver: tolerances must be positive")
    if cfg.newton_max_iter < 1:
        errors.append("solver.newton_max_iter: must be at least 1")
    if cfg.linear_method not in ("auto", "cg", "banded", "dense", "sparse"):
        errors.append(f"solver.linear_method: unknown method {cfg.linear_method!r}")
    for key in ("rho0", "mu0"):
        text = getattr(cfg, key)
        try:
            lo, hi = preset_bounds(text)
        except ValueError as exc:
            errors.append(f"initial.{key}: {exc}")
            continue
        if key == "mu0" and lo < 0:
            errors.append("initial.mu0: mu0 must be nonnegative")
        if key == "rho0":
            if cfg.eps == 0 and lo <= 0:
                errors.append("initial.rho0: eps = 0 requires inf rho0 > 0 (rho0 preset touches 0)")
            elif lo < 0 or hi >= 1 or (lo == 0 and hi == 0):
                errors.append("initial.rho0: rho0 must lie in (0, 1)")
            elif grid_ok:
                rho = evaluate_preset(text, cfg.grid())
                if not (np.min(rho) > 0 and np.max(rho) < 1):
                    errors.append("initial.rho0: rho0 must lie in (0, 1)")
    return errors


def dump_config(cfg: SimConfig) -> str:
    """Resolved config (defaults filled in) in the same INI format."""
    join = lambda xs: ", ".join(repr(x) if isinstance(x, float) else str(x) for x in xs)
    sections = {
        "grid": {"dim": cfg.dim, "cells": join(cfg.cells), "extent": join(cfg.extent)},
        "physics": {"eps": repr(cfg.eps), "delta": repr(cfg.delta), "lambda": repr(cfg.lam)},
        "time": {"dt": repr(cfg.dt), "t_final": repr(cfg.t_final), "snapshot_stride": cfg.snapshot_stride},
        "initial": {"rho0": cfg.rho0, "mu0": cfg.mu0, "mollify_eps": repr(cfg.mollify_eps)},
        "solver": {"newton_tol": repr(cfg.newton_tol), "newton_max_iter": cfg.newton_max_iter,
                   "linear_tol": repr(cfg.linear_tol), "linear_method": cfg.linear_method},
        "output": {"directory": cfg.output_dir, "formats": ", ".join(cfg.formats)},
    }
    out = []
    for name, items in sections.items():
        out.append(f"[{name}]")
        out += [f"{k} = {v}" for k, v in items.items()]
        out.append("")
    return "\n".join(out)


def tanh_preset(eps: float = 0.05, dt: float = 1e-3, t_final: float = 1.0, cells: int = 128) -> SimConfig:
    """1D two-phase benchmark: a tanh interface between 0.1 and 0.9 on
    (0, 0.5), constant mu0 = 0.5, delta = 0.5, lambda = 3."""
    return SimConfig(cells=(cells,), extent=(0.5,), eps=eps, delta=0.5, lam=3.0, dt=dt, t_final=t_final,
                     rho0="tanh_profile(0.25, 0.1, 0.1, 0.9)", mu0="homogeneous(0.5)")


def homogeneous_preset(eps: float = 0.05, dt: float = 1e-3, t_final: float = 1.0, cells: int = 16,
                       mu0: float = 0.5, rho0: float = 0.3) -> SimConfig:
    """Spatially constant data; the dynamics reduce to two ODEs."""
    return SimConfig(cells=(cells,), extent=(1.0,), eps=eps, delta=1.0, lam=3.0, dt=dt, t_final=t_final,
                     rho0=f"homogeneous({rho0!r})", mu0=f"homogeneous({mu0!r})")
