import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from viscous_ch import potential as pot
from viscous_ch.potential import PotentialSpec

from conftest import bisect

R3 = 0.04742587317756678  # 1/(1+e^3), from mpmath


def test_f1_values(spec):
    assert pot.f1(spec, 0.5) == pytest.approx(math.log(0.5), rel=1e-15)
    assert pot.f1(spec, 0.3) == pytest.approx(pot.f1(spec, 0.7), rel=1e-14)
    # 40-digit mpmath evaluation of 0.25 ln 0.25 + 0.75 ln 0.75
    assert pot.f1(spec, 0.25) == pytest.approx(-0.5623351446188084, rel=1e-14)


def test_first_derivatives(spec):
    assert pot.f1_prime(spec, 0.5) == 0.0
    assert pot.f1_prime(spec, 0.9) == pytest.approx(-pot.f1_prime(spec, 0.1), rel=1e-14)
    assert pot.f1_prime(spec, R3) == pytest.approx(-3.0, rel=1e-12)
    r = bisect(lambda x: math.log(x / (1 - x)) + 3.0, 1e-12, 0.5)
    assert r == pytest.approx(R3, rel=1e-12)
    assert pot.f2(spec, 0.2) == pytest.approx(3 * 0.2 * 0.8)
    assert pot.f2_prime(spec, 0.2) == pytest.approx(3 * 0.6)
    assert pot.f_prime(spec, 0.2) == pytest.approx(math.log(0.25) + 1.8)


@pytest.mark.parametrize("r", [0.0, 1.0, -0.1, 1.5, np.array([0.5, 1.0])])
def test_domain_errors(spec, r):
    for fn in (pot.f1, pot.f1_prime, pot.f2, pot.f2_prime, pot.f_prime):
        with pytest.raises(pot.DomainError):
            fn(spec, r)


def test_singular_limits(spec):
    assert pot.f1_prime(spec, 1e-6) < -10
    assert pot.f1_prime(spec, 1 - 1e-6) > 10


def test_vectorised(spec):
    r = np.linspace(0.1, 0.9, 5)
    np.testing.assert_allclose(pot.f(spec, r), [pot.f(spec, x) for x in r])


@pytest.mark.parametrize("lam, expected", [(3.0, 3.0), (0.0, 0.0), (1.0, 1.0)])
def test_sup_f2_prime(lam, expected):
    spec = PotentialSpec(lam=lam)
    assert pot.sup_abs_f2_prime(spec) == expected
    r = np.linspace(1e-9, 1 - 1e-9, 10001)
    assert np.max(np.abs(pot.f2_prime(spec, r))) <= expected + 1e-12


def test_lower_barrier_examples():
    assert pot.lower_barrier(PotentialSpec(lam=3.0), 0.2) == pytest.approx(R3, rel=1e-10)
    assert pot.lower_barrier(PotentialSpec(lam=0.0), 0.4) == 0.4
    spec = PotentialSpec(lam=3.0)
    r_m = pot.lower_barrier(spec, 0.4)
    assert pot.lower_barrier(spec, r_m) == r_m
    with pytest.raises(ValueError):
        pot.lower_barrier(spec, 0.0)


def test_convexity_of_f1(spec):
    r = np.random.default_rng(0).uniform(0.001, 0.999, 1000)
    h = 1e-4
    second = pot.f1(spec, r + h) - 2 * pot.f1(spec, r) + pot.f1(spec, r - h)
    assert np.all(second > 0)
    assert np.all(pot.f1_second(spec, r) > 0)


def test_f2_curvature_bound(spec):
    r = np.linspace(1e-6, 1 - 1e-6, 1001)
    assert np.all(np.abs(pot.f2_second(spec, r)) <= 2 * spec.lam)


def test_derivative_consistency(spec):
    def err(h):
        fd = (pot.f1(spec, 0.3 + h) - pot.f1(spec, 0.3 - h)) / (2 * h)
        return abs(fd - pot.f1_prime(spec, 0.3))

    assert 3.5 <= err(1e-3) / err(5e-4) <= 4.5


@settings(max_examples=200, deadline=None)
@given(lam=st.floats(0.0, 10.0), m=st.floats(1e-6, 0.999))
def test_barrier_property(lam, m):
    spec = PotentialSpec(lam=lam)
    r = pot.lower_barrier(spec, m)
    assert 0 < r <= m
    assert pot.f1_prime(spec, r) <= -pot.sup_abs_f2_prime(spec) + 1e-12


@given(r=st.floats(1e-6, 1 - 1e-6))
def test_symmetry(r):
    spec = PotentialSpec(lam=3.0)
    assert pot.f(spec, r) == pytest.approx(pot.f(spec, 1 - r), rel=1e-9, abs=1e-12)


def test_custom_kind():
    spec = PotentialSpec(
        kind="custom",
        custom_f1=(lambda r: r * np.log(r) + (1 - r) * np.log(1 - r), lambda r: np.log(r / (1 - r)),
                   lambda r: 1 / (r * (1 - r))),
        custom_f2=(lambda r: 2 * r * (1 - r), lambda r: 2 * (1 - 2 * r), lambda r: -4.0 + 0 * r),
        custom_sup_f2_prime=2.0,
    )
    ref = PotentialSpec(lam=2.0)
    assert pot.f_prime(spec, 0.37) == pytest.approx(pot.f_prime(ref, 0.37))
    assert pot.lower_barrier(spec, 0.3) == pytest.approx(pot.lower_barrier(ref, 0.3))
    with pytest.raises(ValueError):
        PotentialSpec(kind="custom")
