import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from viscous_ch import grid as gr

from conftest import dense_neumann_laplacian

GRIDS = [gr.line(17, 1.3), gr.line(3, 1.0), gr.rectangle((5, 7), (1.0, 2.0)), gr.rectangle((12, 12))]


def test_grid_validation():
    with pytest.raises(ValueError):
        gr.line(2)
    with pytest.raises(ValueError):
        gr.Grid((4, 4, 4), (1, 1, 1))
    g = gr.rectangle((4, 6), (2.0, 3.0))
    assert g.size == 24 and g.spacing == (0.5, 0.5) and g.dim == 2


@pytest.mark.parametrize("g", GRIDS)
def test_laplacian_annihilates_constants(g):
    assert np.all(gr.laplacian_neumann(g, g.full(3.7)) == 0.0)
    L = gr.laplacian_matrix(g)
    np.testing.assert_allclose(np.asarray(L.sum(axis=1)).ravel(), 0.0, atol=1e-9)


def test_laplacian_tiny_example(tiny):
    # mirror ghost: ghost equals adjacent interior value
    v = np.array([0.0, 1.0, 2.0])
    A = dense_neumann_laplacian(3, 1.0)
    np.testing.assert_allclose(A @ v, [1.0, 0.0, -1.0])
    np.testing.assert_allclose(gr.laplacian_neumann(tiny, v), A @ v, atol=1e-15)


@pytest.mark.parametrize("g", GRIDS)
def test_matrix_matches_stencil(g):
    v = np.random.default_rng(1).normal(size=g.shape)
    np.testing.assert_allclose(gr.laplacian_matrix(g) @ v.ravel(), gr.laplacian_neumann(g, v).ravel(),
                               rtol=1e-12, atol=1e-9)


def test_laplacian_second_order():
    errs = []
    for n in (32, 64, 128):
        g = gr.line(n)
        x = g.centers()[0]
        errs.append(np.max(np.abs(gr.laplacian_neumann(g, np.cos(np.pi * x)) + np.pi**2 * np.cos(np.pi * x))))
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_norms():
    g = gr.line(4, 1.0)
    ones = g.full(1.0)
    assert gr.l2_norm(g, ones) == pytest.approx(1.0)
    assert gr.integrate(g, g.full(2.5)) == pytest.approx(2.5)
    assert gr.h1_seminorm(g, g.full(2.5)) == 0.0
    assert gr.h1_seminorm(gr.line(3, 3.0), np.array([0.0, 1.0, 2.0])) == pytest.approx(np.sqrt(2.0))
    v = np.array([1.0, 2.0, 3.0, 6.0])
    assert gr.mean(g, v) == pytest.approx(3.0)
    assert gr.spatial_variance(g, v) == pytest.approx(np.var(v))


@pytest.mark.parametrize("g", GRIDS)
def test_symmetry_definiteness_green(g):
    rng = np.random.default_rng(2)
    for _ in range(100):
        u, v = rng.normal(size=g.shape), rng.normal(size=g.shape)
        Lu, Lv = gr.laplacian_neumann(g, u), gr.laplacian_neumann(g, v)
        a, b = gr.inner(g, Lu, v), gr.inner(g, u, Lv)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12 * np.sqrt(gr.inner(g, Lu, Lu) * gr.inner(g, v, v)))
        assert gr.inner(g, Lu, u) <= 0
        assert -gr.inner(g, Lu, u) == pytest.approx(gr.h1_seminorm(g, u) ** 2, rel=1e-12)


def test_helmholtz_trivial():
    g = gr.line(10)
    np.testing.assert_allclose(gr.solve_helmholtz(g, g.full(1.0), g.full(3.0)), 3.0, rtol=1e-12)
    assert np.all(gr.solve_helmholtz(g, g.full(1.0), g.full(0.0)) == 0.0)
    g2 = gr.rectangle((8, 8))
    np.testing.assert_allclose(gr.solve_helmholtz(g2, g2.full(4.0), g2.full(2.0)), 0.5, rtol=1e-10)


def test_helmholtz_dense_oracle(tiny):
    a, rhs = np.array([1.0, 2.0, 1.0]), np.array([1.0, 0.0, 1.0])
    # Gaussian elimination on the hand-built system, no pivoting needed
    M = np.diag(a) - dense_neumann_laplacian(3, 1.0)
    b = rhs.copy()
    for k in range(3):
        for i in range(k + 1, 3):
            m = M[i, k] / M[k, k]
            M[i] -= m * M[k]
            b[i] -= m * b[k]
    x = np.zeros(3)
    for i in reversed(range(3)):
        x[i] = (b[i] - M[i, i + 1:] @ x[i + 1:]) / M[i, i]
    np.testing.assert_allclose(x, [2 / 3, 1 / 3, 2 / 3], rtol=1e-14)
    for method in ("dense", "banded", "cg", "sparse", "auto"):
        np.testing.assert_allclose(gr.solve_helmholtz(tiny, a, rhs, method=method), x, atol=1e-10)


@pytest.mark.parametrize("g", [gr.line(200), gr.rectangle((30, 40), (1.0, 1.5))])
def test_helmholtz_residual(g):
    rng = np.random.default_rng(3)
    a = rng.uniform(0.1, 5.0, g.shape)
    rhs = rng.normal(size=g.shape)
    for method in ("cg", "sparse"):
        v = gr.solve_helmholtz(g, a, rhs, tol=1e-10, method=method)
        res = a * v - gr.laplacian_neumann(g, v) - rhs
        assert gr.l2_norm(g, res) <= 1e-10 * gr.l2_norm(g, rhs) * 1.0001


def test_helmholtz_rejects_nonpositive():
    g = gr.line(5)
    with pytest.raises(ValueError):
        gr.solve_helmholtz(g, np.array([1, 1, 0, 1, 1.0]), g.full(1.0))


def test_cg_failure_reports_iterations():
    g = gr.line(50, 1.0)
    with pytest.raises(gr.LinearSolverError) as info:
        gr.pcg(lambda x: (1e-6 * x.reshape(g.shape) - gr.laplacian_neumann(g, x.reshape(g.shape))).ravel(),
               np.random.default_rng(0).normal(size=50), np.ones(50), tol=1e-14, maxiter=3)
    assert info.value.iterations == 3


def test_helmholtz_positivity_random():
    rng = np.random.default_rng(4)
    worst = np.inf
    for k in range(1000):
        g = gr.line(int(rng.integers(3, 40)), float(rng.uniform(0.2, 3))) if k % 2 else \
            gr.rectangle((int(rng.integers(3, 9)), int(rng.integers(3, 9))))
        a = rng.uniform(1e-3, 10.0, g.shape)
        rhs = rng.uniform(0.0, 1.0, g.shape) * (rng.uniform(size=g.shape) < 0.5)
        v = gr.solve_helmholtz(g, a, rhs)
        worst = min(worst, float(np.min(v)))
    assert worst >= -1e-12


@settings(max_examples=50, deadline=None)
@given(c=st.floats(0.01, 100.0), r=st.floats(0.0, 100.0))
def test_helmholtz_constant_solution(c, r):
    g = gr.line(9)
    np.testing.assert_allclose(gr.solve_helmholtz(g, g.full(c), g.full(r)), r / c, rtol=1e-12, atol=1e-300)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 5), elements=st.floats(-1e6, 1e6)))
def test_snapshot_round_trip(tmp_path_factory, values):
    g = gr.rectangle((6, 5), (1.2, 0.7))
    path = tmp_path_factory.mktemp("snap") / "s.txt"
    gr.write_snapshot(path, g, values, 0.125)
    g2, v2, t = gr.read_snapshot(path)
    assert g2.cells == g.cells and t == 0.125
    np.testing.assert_allclose(g2.spacing, g.spacing, rtol=1e-15)
    assert np.array_equal(v2, values)


def test_snapshot_header(tmp_path):
    g = gr.line(3, 1.5)
    gr.write_snapshot(tmp_path / "a.txt", g, [0.1, 0.2, 1 / 3], 2.0)
    lines = (tmp_path / "a.txt").read_text().splitlines()
    assert lines[0] == "1 3 0.5 2.0"
    assert lines[3] == "0.33333333333333331"
