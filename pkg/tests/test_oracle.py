import numpy as np
import pytest

from caplace.errors import IncompatibleDataError, ValidationError
from caplace.geometry import BoundaryData, unit_circle
from caplace.oracle import FDGrid, fd_solve_neumann, fourier_neumann_disk, laplacian_residual

N = 1024
T = 2 * np.pi * np.arange(N) / N


def test_fourier_cos():
    sol = fourier_neumann_disk(BoundaryData(np.cos(T)))
    z = 0.37 * np.exp(0.9j)
    assert sol.u(z) == pytest.approx(-z.real)
    # interior normal derivative -du/dr at the boundary reproduces the data
    r = 0.5
    du_dr = (sol.u(0.5001 + 0j) - sol.u(0.4999 + 0j)) / 2e-4
    assert -du_dr == pytest.approx(-(-1.0), abs=1e-8)  # d(-r cos)/dr = -cos(0)


def test_fourier_zero():
    sol = fourier_neumann_disk(BoundaryData.constant(0.0, N))
    assert sol.u(0.3 + 0.2j) == 0.0


def test_fourier_sin2():
    sol = fourier_neumann_disk(BoundaryData(np.sin(2 * T)))
    z = 0.4 + 0.3j
    r, th = abs(z), np.angle(z)
    assert sol.u(z) == pytest.approx(-(r**2 / 2) * np.sin(2 * th))


def test_fourier_refuses_nonzero_mean():
    with pytest.raises(IncompatibleDataError):
        fourier_neumann_disk(BoundaryData.constant(1.0, N))


@pytest.fixture(scope="module")
def circle():
    return unit_circle(N)


def _compare(curve, phi, coeffs, ref_u, n):
    grid = FDGrid(curve, n)
    sol = fd_solve_neumann(coeffs, grid, phi)
    assert sol.algebraic_residual < 1e-8
    z, u = sol.points()
    keep = np.abs(z) <= 0.999
    z, u = z[keep], u[keep]
    err = u - ref_u(z)
    err -= np.mean(err)
    return z, err


def test_fd_matches_fourier_disk(circle):
    phi = BoundaryData(np.cos(T))
    ref = fourier_neumann_disk(phi)
    z, err = _compare(circle, phi, (1.0, 1.0), ref.u, 129)
    assert np.max(np.abs(err)) < 1e-2


def test_fd_refinement_order(circle):
    phi = BoundaryData(np.sin(2 * T))
    ref = fourier_neumann_disk(phi)
    errs = []
    for n in (33, 65, 129):
        z, err = _compare(circle, phi, (1.0, 1.0), ref.u, n)
        inner = np.abs(z) <= 0.8
        errs.append(np.sqrt(np.mean(err[inner] ** 2)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.mean(orders) >= 1.5
    assert errs[-1] < errs[0]


def test_fd_manufactured_anisotropic(circle):
    # u0 = x solves div(diag(2, 1/2) grad u0) = 0; conormal data 2 n_x
    phi = BoundaryData(2.0 * circle.n.real)
    z, err = _compare(circle, phi, (2.0, 0.5), lambda w: np.real(w), 129)
    assert np.max(np.abs(err)) < 1e-2


def test_fd_constant_data_gives_constant(circle):
    phi = BoundaryData.constant(0.0, N)
    grid = FDGrid(circle, 33)
    sol = fd_solve_neumann((1.0, 1.0), grid, phi)
    assert np.max(np.abs(sol.values)) < 1e-10


def test_fd_rejects_full_tensor(circle):
    from caplace.beltrami import MatrixFieldA

    A = MatrixFieldA.constant([[2.0, 0.3], [0.3, (1 + 0.09) / 2.0]], n=32)
    grid = FDGrid(circle, 17)
    with pytest.raises(ValidationError):
        fd_solve_neumann(A, grid, BoundaryData.constant(0.0, N))


def test_fd_compatibility_projection_reported(circle):
    grid = FDGrid(circle, 33)
    sol = fd_solve_neumann((1.0, 1.0), grid, BoundaryData.constant(1.0, N))
    # the oracle survives by projecting the defect out, and says so
    assert sol.compatibility_defect == pytest.approx(1.0, rel=1e-6)


def test_laplacian_residual_harmonic_cubic():
    u = lambda z: np.real(np.asarray(z) ** 3)
    r1 = laplacian_residual(u, n=33)
    r2 = laplacian_residual(u, n=65)
    assert r1.max_abs < 1e-10 or r2.max_abs < r1.max_abs  # exact for cubics


def test_laplacian_residual_detects_x_squared():
    u = lambda z: np.real(np.asarray(z)) ** 2
    rep = laplacian_residual(u)
    assert rep.max_abs == pytest.approx(2.0, abs=1e-8)


def test_laplacian_residual_log_solution():
    # harmonic away from z = 1; radius 0.7 keeps h well below the distance
    # to the singularity so the h^2 regime is visible
    u = lambda z: -2 * np.log(np.abs(1 - np.asarray(z)))
    r1 = laplacian_residual(u, radius=0.7, n=41)
    r2 = laplacian_residual(u, radius=0.7, n=81)
    order = np.log(r1.max_abs / r2.max_abs) / np.log(r1.step / r2.step)
    assert order >= 1.8
