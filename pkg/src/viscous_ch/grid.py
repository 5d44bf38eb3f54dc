"""Cell-centred Cartesian grids with homogeneous Neumann operators.

Fields are plain numpy arrays whose shape equals ``grid.shape``.  The
Neumann condition is imposed with mirror ghost cells (ghost value equal to
the adjacent interior value), which gives a symmetric negative
semidefinite Laplacian with zero row sums.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded


class LinearSolverError(RuntimeError):
    """Raised when an iterative linear solve fails to converge."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class Grid:
    cells: tuple[int, ...]
    extent: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))
        object.__setattr__(self, "extent", tuple(float(L) for L in self.extent))
        if len(self.cells) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if len(self.extent) != len(self.cells):
            raise ValueError("cells and extent must have the same length")
        if min(self.cells) < 3:
            raise ValueError("need at least 3 cells per axis")
        if min(self.extent) <= 0:
            raise ValueError("extent must be positive")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extent, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.extent))

    def centers(self):
        """Cell-centre coordinates, one array per axis (``indexing='ij'``)."""
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.cells, self.spacing)]
        return np.meshgrid(*axes, indexing="ij") if self.dim == 2 else axes

    def full(self, value) -> np.ndarray:
        return np.full(self.shape, float(value))


def line(cells: int, extent: float = 1.0) -> Grid:
    return Grid((cells,), (extent,))


def rectangle(cells: tuple[int, int], extent=(1.0, 1.0)) -> Grid:
    return Grid(tuple(cells), tuple(extent))


def laplacian_neumann(grid: Grid, v: np.ndarray) -> np.ndarray:
    """3-point / 5-point Laplacian with mirror ghost cells.

    Written in flux form: each interior face adds its difference quotient to
    one neighbour and subtracts it from the other; boundary faces carry
    zero flux.
    """
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    for axis, h in enumerate(grid.spacing):
        flux = np.diff(v, axis=axis) / h**2
        lo = [slice(None)] * v.ndim
        hi = [slice(None)] * v.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        out[tuple(lo)] += flux
        out[tuple(hi)] -= flux
    return out


def _lap_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """Sparse matrix of :func:`laplacian_neumann` acting on ``v.ravel()``."""
    if grid.dim == 1:
        return _lap_1d(grid.cells[0], grid.spacing[0])
    (n1, n2), (h1, h2) = grid.cells, grid.spacing
    return (sp.kron(_lap_1d(n1, h1), sp.identity(n2)) + sp.kron(sp.identity(n1), _lap_1d(n2, h2))).tocsr()


def inner(grid: Grid, u, v) -> float:
    return float(np.sum(np.asarray(u) * np.asarray(v)) * grid.cell_volume)


def integrate(grid: Grid, v) -> float:
    return float(np.sum(v) * grid.cell_volume)


def l2_norm(grid: Grid, v) -> float:
    return float(np.sqrt(np.sum(np.square(v)) * grid.cell_volume))


def h1_seminorm(grid: Grid, v) -> float:
    """Discrete ||grad v|| from face differences; boundary faces carry no flux."""
    v = np.asarray(v, dtype=float)
    total = 0.0
    for axis, h in enumerate(grid.spacing):
        total += np.sum(np.square(np.diff(v, axis=axis) / h))
    return float(np.sqrt(total * grid.cell_volume))


def mean(grid: Grid, v) -> float:
    return integrate(grid, v) / grid.volume


def spatial_variance(grid: Grid, v) -> float:
    v = np.asarray(v, dtype=float)
    return integrate(grid, np.square(v - mean(grid, v))) / grid.volume


def pcg(apply_A, b, diag, tol=1e-10, maxiter=None, x0=None):
    """Jacobi-preconditioned conjugate gradients.

    Stops when ``||b - A x||_2 <= tol * ||b||_2``.  Returns ``(x, iters)``.
    """
    b = np.asarray(b, dtype=float)
    n = b.size
    maxiter = 10 * n if maxiter is None else maxiter
    bnorm = np.linalg.norm(b)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    if bnorm == 0.0:
        return np.zeros_like(b), 0
    r = b - apply_A(x)
    z = r / diag
    p = z.copy()
    rz = r @ z
    for k in range(1, maxiter + 1):
        Ap = apply_A(p)
        alpha = rz / (p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= tol * bnorm:
            # guard against drift of the recursive residual
            r_true = b - apply_A(x)
            if np.linalg.norm(r_true) <= tol * bnorm:
                return x, k
            r = r_true
        z = r / diag
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = np.linalg.norm(b - apply_A(x)) / bnorm
    raise LinearSolverError(f"CG did not converge in {maxiter} iterations (rel. residual {res:.3e})",
                            iterations=maxiter, residual=res)


def helmholtz_matrix(grid: Grid, a) -> sp.csr_matrix:
    return (sp.diags(np.ravel(a)) - laplacian_matrix(grid)).tocsr()


def solve_helmholtz(grid: Grid, a, rhs, tol: float = 1e-10, method: str = "auto") -> np.ndarray:
    """Solve ``a * v - lap(v) = rhs`` with Neumann conditions.

    The matrix is a symmetric M-matrix for ``a > 0``, so ``rhs >= 0`` gives
    ``v >= 0``.

    Parameters
    ----------
    a, rhs : ndarray
        Cell fields; ``a`` must be strictly positive.
    tol : float
        Relative residual target for the iterative path.
    method : {"auto", "cg", "banded", "dense", "sparse"}
        ``auto`` uses a banded (tridiagonal) solve in 1D and CG in 2D.
        ``dense`` is meant for tiny oracle grids.
    """
    a = np.asarray(a, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if a.shape != grid.shape or rhs.shape != grid.shape:
        raise ValueError("a and rhs must match the grid shape")
    if not np.min(a) > 0:
        raise ValueError("Helmholtz coefficient must be strictly positive")
    if method == "auto":
        method = "banded" if grid.dim == 1 else "cg"
    if not np.any(rhs):
        return np.zeros(grid.shape)
    if method == "dense":
        v = np.linalg.solve(helmholtz_matrix(grid, a).toarray(), rhs.ravel())
    elif method == "banded":
        if grid.dim != 1:
            raise ValueError("banded solver is 1D only")
        n, h2 = grid.size, grid.spacing[0] ** 2
        ab = np.zeros((3, n))
        ab[0, 1:] = -1.0 / h2
        ab[2, :-1] = -1.0 / h2
        ab[1] = a + 2.0 / h2
        ab[1, 0] -= 1.0 / h2
        ab[1, -1] -= 1.0 / h2
        v = solve_banded((1, 1), ab, rhs)
    elif method == "sparse":
        v = spla.spsolve(helmholtz_matrix(grid, a).tocsc(), rhs.ravel())
    elif method == "cg":
        diag = a.ravel() + sum(2.0 / h**2 for h in grid.spacing)

        def apply_A(x):
            xs = x.reshape(grid.shape)
            return (a * xs - laplacian_neumann(grid, xs)).ravel()

        v, _ = pcg(apply_A, rhs.ravel(), diag, tol=tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.asarray(v).reshape(grid.shape)


def write_snapshot(path, grid: Grid, v, time: float) -> None:
    """Plain-text snapshot: header ``dim n1 [n2] h1 [h2] time`` then values."""
    header = [str(grid.dim), *map(str, grid.cells), *(repr(h) for h in grid.spacing), repr(float(time))]
    lines = [" ".join(header)]
    lines += [f"{x:.17g}" for x in np.asarray(v, dtype=float).ravel()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_snapshot(path) -> tuple[Grid, np.ndarray, float]:
    text = Path(path).read_text().split("\n")
    head = text[0].split()
    dim = int(head[0])
    cells = tuple(int(x) for x in head[1:1 + dim])
    spacing = tuple(float(x) for x in head[1 + dim:1 + 2 * dim])
    time = float(head[1 + 2 * dim])
    grid = Grid(cells, tuple(n * h for n, h in zip(cells, spacing)))
    values = np.array([float(x) for x in text[1:] if x.strip()])
    if values.size != grid.size:
        raise ValueError(f"snapshot has {values.size} values, expected {grid.size}")
    return grid, values.reshape(cells), time
