import numpy as np
import pytest

from caplace.beltrami import (
    A_from_mu,
    BeltramiField,
    K_mu,
    MatrixFieldA,
    extend_mu,
    mu_from_A,
    radial_cutoff,
    solve_beltrami,
)
from caplace.errors import ConfigurationError, DegeneracyError, ValidationError


def const_mu(c, n=32, L=2.0):
    return BeltramiField.from_function(lambda z: c + 0.0 * np.asarray(z), L=L, n=n)


def random_mu(seed, kmax, n=32):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    vals *= kmax / np.max(np.abs(vals))
    x = -2.0 + 4.0 * np.arange(n) / n
    return BeltramiField(x, x.copy(), vals)


def test_identity_matrix_gives_zero_mu():
    assert np.max(np.abs(mu_from_A(MatrixFieldA.identity(n=16)).mu)) == 0.0


def test_diag_2_half_gives_minus_third():
    A = MatrixFieldA.constant([[2.0, 0.0], [0.0, 0.5]], n=16)
    mu = mu_from_A(A)
    assert mu.mu[0, 0] == pytest.approx(-1.0 / 3.0, abs=1e-14)


def test_eq3_inversion_case():
    k = 0.2
    d = 1 - k * k
    A = MatrixFieldA.constant(
        [[(1 + k * k) / d, -2 * k / d], [-2 * k / d, (1 + k * k) / d]], n=16
    )
    assert mu_from_A(A).mu[0, 0] == pytest.approx(0.2j, abs=1e-14)


def test_A_from_mu_values():
    mu = const_mu(-1.0 / 3.0, n=16)
    A = A_from_mu(mu)
    assert A.a11[0, 0] == pytest.approx(2.0, abs=1e-14)
    assert A.a22[0, 0] == pytest.approx(0.5, abs=1e-14)
    assert A.a12[0, 0] == pytest.approx(0.0, abs=1e-14)
    mu2 = const_mu(0.2j, n=16)
    A2 = A_from_mu(mu2)
    assert A2.a12[0, 0] == pytest.approx(-0.4 / 0.96, abs=1e-14)
    assert A2.a11[0, 0] == pytest.approx(1.04 / 0.96, abs=1e-14)
    det = A2.a11 * A2.a22 - A2.a12**2
    assert np.max(np.abs(det - 1.0)) < 1e-12


def test_round_trip_random_fields():
    for seed in range(5):
        mu = random_mu(seed, 0.9)
        back = mu_from_A(A_from_mu(mu))
        assert np.max(np.abs(back.mu - mu.mu)) < 1e-12
    for seed in range(5):
        mu = random_mu(100 + seed, 0.519)
        A = A_from_mu(mu)
        A2 = A_from_mu(mu_from_A(A))
        for name in ("a11", "a12", "a22"):
            assert np.max(np.abs(getattr(A2, name) - getattr(A, name))) < 1e-10


def test_det_identity_up_to_k09():
    mu = random_mu(7, 0.9)
    A = A_from_mu(mu)
    det = A.a11 * A.a22 - A.a12**2
    assert np.max(np.abs(det - 1.0)) < 1e-12


def test_eigenvalues_are_K_and_inverse():
    mu = random_mu(8, 0.7)
    A = A_from_mu(mu)
    K, Ksup = K_mu(mu)
    tr = A.a11 + A.a22
    root = np.sqrt(tr**2 - 4.0)
    lam_max = (tr + root) / 2
    lam_min = (tr - root) / 2
    assert np.max(np.abs(lam_max - K)) < 1e-10
    assert np.min(lam_min - (1.0 - np.abs(mu.mu)) / (1.0 + np.abs(mu.mu))) > -1e-10


def test_K_mu_values():
    assert K_mu(const_mu(0.0, 8))[1] == pytest.approx(1.0)
    assert K_mu(const_mu(1.0 / 3.0, 8))[1] == pytest.approx(2.0)
    assert K_mu(const_mu(0.5j, 8))[1] == pytest.approx(3.0)


def test_validate_reports_offenders():
    A = MatrixFieldA.constant([[2.0, 0.0], [0.0, 1.0]], n=8)  # det = 2
    with pytest.raises(ValidationError) as exc:
        A.validate()
    assert "points" in exc.value.details


def test_degenerate_mu_rejected():
    with pytest.raises(DegeneracyError):
        const_mu(1.0, 8)
    A_from_mu(const_mu(0.999, 8))  # nondegenerate: still fine


def test_extend_mu_agrees_on_disk():
    ext = extend_mu(lambda z: 0.3 + 0.0 * np.asarray(z), R=1.5, L=2.0, n=128)
    X, Y = np.meshgrid(ext.x, ext.y, indexing="ij")
    r = np.hypot(X, Y)
    assert np.max(np.abs(ext.mu[r <= 1.0] - 0.3)) < 1e-14
    assert np.max(np.abs(ext.mu[r >= 1.5])) == 0.0
    assert ext.k <= 0.3 + 1e-14


def test_extend_mu_sup_norm_non_increase():
    rng = np.random.default_rng(5)

    def mu_fn(z):
        z = np.asarray(z)
        return 0.4 * np.sin(z.real) * np.cos(z.imag) + 0.1j * np.cos(2 * z.real)

    ext = extend_mu(mu_fn, R=1.6, L=2.0, n=128)
    X, Y = np.meshgrid(ext.x, ext.y, indexing="ij")
    inside = np.hypot(X, Y) <= 1.0
    assert ext.k <= np.max(np.abs(ext.mu[inside])) + 1e-12


def test_extend_mu_rejects_bad_radii():
    with pytest.raises(ConfigurationError):
        extend_mu(lambda z: 0 * np.asarray(z), R=0.9, L=2.0, n=32)
    with pytest.raises(ConfigurationError):
        extend_mu(lambda z: 0 * np.asarray(z), R=2.5, L=2.0, n=32)


def test_cutoff_profile():
    r = np.array([0.0, 1.0, 1.25, 1.5, 2.0])
    c = radial_cutoff(r, 1.0, 1.5)
    assert c[0] == 1.0 and c[1] == 1.0
    assert 0.0 < c[2] < 1.0
    assert c[3] == 0.0 and c[4] == 0.0


def test_solve_identity():
    mu = const_mu(0.0, n=64)
    h = solve_beltrami(mu)
    X, Y = np.meshgrid(mu.x, mu.y, indexing="ij")
    assert np.max(np.abs(h.h_values - (X + 1j * Y))) == 0.0
    assert np.max(np.abs(h.hz_values - 1.0)) == 0.0
    assert np.max(np.abs(h.hzb_values)) == 0.0
    assert np.max(np.abs(h.jacobian_values - 1.0)) == 0.0


def test_solve_plateau_derivative_ratio():
    mu = extend_mu(lambda z: 0.3 + 0.0 * np.asarray(z), R=1.5, L=2.0, n=256)
    h = solve_beltrami(mu)
    pts = np.array([0.1 + 0.2j, -0.4 + 0.1j, 0.3 - 0.3j])
    ratio = h.h_zbar(pts) / h.h_z(pts)
    assert np.max(np.abs(ratio - 0.3)) < 1e-3
    assert h.directional(pts[:1], 1.0)[0] / h.h_z(pts[:1])[0] == pytest.approx(1.3, abs=1e-10)


def test_solve_random_smooth_k04():
    rng = np.random.default_rng(42)
    coef = rng.standard_normal((3, 3, 2))

    def raw(z):
        z = np.asarray(z)
        out = np.zeros(z.shape, dtype=complex)
        for p in range(3):
            for q in range(3):
                out += (coef[p, q, 0] + 1j * coef[p, q, 1]) * np.cos(
                    (p + 1) * 2.0 * z.real
                ) * np.cos((q + 1) * 2.0 * z.imag + 0.3)
        return out

    probe = raw(np.linspace(-1, 1, 64)[None, :] + 1j * np.linspace(-1, 1, 64)[:, None])
    scale = 0.4 / np.max(np.abs(probe))
    mu = extend_mu(lambda z: scale * raw(z), R=1.5, L=2.0, n=256)
    h = solve_beltrami(mu)
    assert h.residual_sup <= 1e-6
    assert np.min(h.jacobian_values) > 0.0
    assert h.distortion_sup(1.0) <= K_mu(mu)[1] + 0.05


def test_grid_values_consistent_with_derivatives():
    # raw second differences of h match the spectral derivative fields
    mu = extend_mu(lambda z: -1 / 3 + 0.0 * np.asarray(z), R=1.5, L=2.0, n=128)
    h = solve_beltrami(mu)
    x = mu.x
    dx = x[1] - x[0]
    i = len(x) // 2 + 3
    j = len(x) // 2 - 5
    fd_x = (h.h_values[i + 1, j] - h.h_values[i - 1, j]) / (2 * dx)
    assert fd_x == pytest.approx(
        h.hz_values[i, j] + h.hzb_values[i, j], abs=5e-4
    )


def test_directional_derivative_identity_map():
    mu = const_mu(0.0, n=64)
    h = solve_beltrami(mu)
    w = np.exp(0.7j)
    assert h.directional(np.array([0.1 + 0.1j]), w)[0] == pytest.approx(w)


def test_directional_nonvanishing():
    mu = extend_mu(lambda z: 0.4j + 0.0 * np.asarray(z), R=1.5, L=2.0, n=128)
    h = solve_beltrami(mu)
    rng = np.random.default_rng(0)
    pts = (rng.random(40) * 2 - 1) + 1j * (rng.random(40) * 2 - 1)
    for w in (1.0, 1j, np.exp(2.2j)):
        d = h.directional(pts, w)
        lower = np.abs(h.h_z(pts)) - np.abs(h.h_zbar(pts))
        assert np.all(np.abs(d) >= lower - 1e-12)
        assert np.all(np.abs(d) > 0)


def test_inverse_round_trip():
    mu = extend_mu(lambda z: 0.3 - 0.2j + 0.0 * np.asarray(z), R=1.5, L=2.0, n=256)
    h = solve_beltrami(mu)
    rng = np.random.default_rng(3)
    z = 0.9 * ((rng.random(25) * 2 - 1) + 1j * (rng.random(25) * 2 - 1))
    w = h(z)
    assert np.max(np.abs(h.inverse(w) - z)) < 1e-6


def test_solver_reports_exhausted_iterations():
    from caplace.errors import ConvergenceError

    mu = extend_mu(lambda z: 0.5 + 0.0 * np.asarray(z), R=1.5, L=2.0, n=64)
    with pytest.raises(ConvergenceError) as exc:
        solve_beltrami(mu, max_iters=3)
    assert "iterations" in exc.value.details or "grid" in exc.value.details


def test_directional_out_of_grid_rejected():
    from caplace.errors import DomainError

    h = solve_beltrami(const_mu(0.0, n=64))
    with pytest.raises(DomainError):
        h.directional(np.array([5.0 + 0.0j]), 1.0)
    with pytest.raises(DomainError):
        h.directional(np.array([0.0j]), 0.5)  # direction must be unimodular


def test_csv_export(tmp_path):
    mu = const_mu(0.25, n=16)
    mu.to_csv(tmp_path / "mu")
    data = np.loadtxt(tmp_path / "mu.csv", delimiter=",", skiprows=1)
    assert data.shape == (256, 4)
    import json

    header = json.loads((tmp_path / "mu.json").read_text())
    assert header["N"] == 16 and header["k"] == pytest.approx(0.25)
