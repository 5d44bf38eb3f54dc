import numpy as np
import pytest

from viscous_ch import grid as gr
from viscous_ch.potential import PotentialSpec


def bisect(fn, a, b, iters=200):
    """Plain scalar bisection; fn(a) and fn(b) must differ in sign."""
    fa = fn(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = fn(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def dense_neumann_laplacian(n, h):
    """Hand-assembled mirror-ghost Laplacian, independent of the package."""
    A = np.zeros((n, n))
    for i in range(n):
        for j in (i - 1, i + 1):
            jj = min(max(j, 0), n - 1)  # ghost reflects to the cell itself
            A[i, jj] += 1.0
        A[i, i] -= 2.0
    return A / h**2


@pytest.fixture
def spec():
    return PotentialSpec(lam=3.0)


@pytest.fixture
def tiny():
    return gr.line(3, 3.0)
