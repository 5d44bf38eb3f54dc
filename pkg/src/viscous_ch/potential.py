"""Double-well potential f = f1 + f2 on (0, 1).

The default is the logarithmic well

    f(r) = r ln r + (1 - r) ln(1 - r) + lam * r (1 - r),

split into the singular convex part f1 and the smooth part f2 with bounded
curvature.  All evaluators accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class DomainError(ValueError):
    """Raised when the potential is evaluated outside (0, 1)."""


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of the split potential.

    ``kind="logarithmic"`` uses the closed forms above.  ``kind="custom"``
    takes user callables for f1 and f2 and their first two derivatives, plus
    the supremum of |f2'| (needed for the lower barrier).
    """

    kind: str = "logarithmic"
    lam: float = 3.0
    singular_floor: float = 1e-12
    custom_f1: Optional[tuple[Callable, Callable, Callable]] = None
    custom_f2: Optional[tuple[Callable, Callable, Callable]] = None
    custom_sup_f2_prime: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("logarithmic", "custom"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "logarithmic" and self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if not 0 < self.singular_floor < 0.5:
            raise ValueError("singular_floor must lie in (0, 0.5)")
        if self.kind == "custom" and (
            self.custom_f1 is None or self.custom_f2 is None or self.custom_sup_f2_prime is None
        ):
            raise ValueError("custom potential needs custom_f1, custom_f2 and custom_sup_f2_prime")


def _check(r):
    r = np.asarray(r, dtype=float)
    if not np.all((r > 0) & (r < 1)):
        bad = r[~((r > 0) & (r < 1))]
        raise DomainError(f"potential evaluated outside (0, 1): {bad.ravel()[:5]}")
    return r


def _out(r, value):
    return float(value) if np.ndim(r) == 0 else value


def clamp(spec: PotentialSpec, r):
    """Clip ``r`` into [floor, 1 - floor]. Only for Newton trial points."""
    return np.clip(r, spec.singular_floor, 1.0 - spec.singular_floor)


def f1(spec: PotentialSpec, r):
    x = _check(r)
    if spec.kind == "custom":
        return _out(r, spec.custom_f1[0](x))
    return _out(r, x * np.log(x) + (1.0 - x) * np.log1p(-x))


def f1_prime(spec: PotentialSpec, r):
    x = _check(r)
    if spec.kind == "custom":
        return _out(r, spec.custom_f1[1](x))
    return _out(r, np.log(x) - np.log1p(-x))


def f1_second(spec: PotentialSpec, r):
    x = _check(r)
    if spec.kind == "custom":
        return _out(r, spec.custom_f1[2](x))
    return _out(r, 1.0 / (x * (1.0 - x)))


def f2(spec: PotentialSpec, r):
    x = _check(r)
    if spec.kind == "custom":
        return _out(r, spec.custom_f2[0](x))
    return _out(r, spec.lam * x * (1.0 - x))


def f2_prime(spec: PotentialSpec, r):
    x = _check(r)
    if spec.kind == "custom":
        return _out(r, spec.custom_f2[1](x))
    return _out(r, spec.lam * (1.0 - 2.0 * x))


def f2_second(spec: PotentialSpec, r):
    x = _check(r)
    if spec.kind == "custom":
        return _out(r, spec.custom_f2[2](x))
    return _out(r, np.full_like(x, -2.0 * spec.lam))


def f(spec: PotentialSpec, r):
    return f1(spec, r) + f2(spec, r)


def f_prime(spec: PotentialSpec, r):
    return f1_prime(spec, r) + f2_prime(spec, r)


def f_second(spec: PotentialSpec, r):
    return f1_second(spec, r) + f2_second(spec, r)


def sup_abs_f2_prime(spec: PotentialSpec) -> float:
    """The constant M = sup |f2'| over (0, 1)."""
    if spec.kind == "custom":
        return float(spec.custom_sup_f2_prime)
    # |lam (1 - 2r)| is maximal at the endpoints
    return float(spec.lam)


def _root_f1_prime(spec: PotentialSpec, target: float, rtol: float = 1e-12) -> float:
    # f1' is strictly increasing, so plain bisection is safe
    lo, hi = 1e-300, 0.5
    while f1_prime(spec, hi) < target:
        hi = 0.5 * (1.0 + hi)
        if 1.0 - hi < 1e-15:
            return hi
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if f1_prime(spec, mid) <= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return lo


def lower_barrier(spec: PotentialSpec, rho0_min: float) -> float:
    """Uniform lower bound r* for the order parameter.

    Returns ``min(rho0_min, r_M)`` where ``f1'(r_M) = -M``.  Any solution
    starting above ``rho0_min`` stays above r*, whatever the viscosity.
    """
    if not rho0_min > 0:
        raise ValueError("lower barrier needs inf rho0 > 0")
    r_m = _root_f1_prime(spec, -sup_abs_f2_prime(spec))
    return min(float(rho0_min), r_m)
