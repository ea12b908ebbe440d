"""Coefficient dictionary A <-> mu and the grid Beltrami solver.

Uniformly elliptic symmetric matrix fields with ``det A = 1`` (class B)
correspond bijectively to nondegenerate Beltrami coefficients:

    mu = (a22 - a11 - 2i a21) / (1 + Tr A + det A)

    A  = [[ |1-mu|^2, -2 Im mu ],
          [ -2 Im mu, |1+mu|^2 ]] / (1 - |mu|^2)

with entries dominated by K_mu = (1 + |mu|) / (1 - |mu|); the eigenvalues
of A are exactly K_mu and 1/K_mu.

The principal solution of ``h_zbar = mu h_z`` for compactly supported mu is
computed on a periodic square grid by the classical singular-integral
iteration ``omega = mu + mu B[omega]`` (B maps dbar-data to d-data; Fourier
multiplier conj(xi)/xi, fixed by the constant-coefficient plateau test),
followed by the antiderivative transform ``h = z + C[omega]``.  The
iteration contracts with rate ``k = ||mu||_inf`` because B is unitary.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneracyError,
    DomainError,
    ValidationError,
)


def square_grid(L=2.0, n=512):
    """Periodic grid axes on [-L, L) with n points per side."""
    x = -L + 2.0 * L * np.arange(int(n)) / int(n)
    return x, x.copy()


def _as_field_values(fn_or_values, x, y):
    if callable(fn_or_values):
        X, Y = np.meshgrid(x, y, indexing="ij")
        return np.asarray(fn_or_values(X + 1j * Y))
    v = np.asarray(fn_or_values)
    if v.shape != (len(x), len(y)):
        raise ConfigurationError(f"grid values must have shape {(len(x), len(y))}")
    return v


class _Spline2:
    """Bicubic interpolation of a complex field over the grid."""

    def __init__(self, x, y, values):
        v = np.asarray(values)
        self.re = RectBivariateSpline(x, y, v.real, kx=3, ky=3)
        self.im = RectBivariateSpline(x, y, v.imag, kx=3, ky=3) if np.iscomplexobj(v) else None
        self.x0, self.x1 = float(x[0]), float(x[-1])
        self.y0, self.y1 = float(y[0]), float(y[-1])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        xr = np.clip(z.real, self.x0, self.x1)
        yr = np.clip(z.imag, self.y0, self.y1)
        if np.max(np.abs(xr - z.real)) > 1e-12 or np.max(np.abs(yr - z.imag)) > 1e-12:
            raise DomainError("evaluation point outside the computational grid")
        out = self.re.ev(xr, yr)
        if self.im is not None:
            out = out + 1j * self.im.ev(xr, yr)
        return out


@dataclass
class MatrixFieldA:
    """Symmetric 2x2 coefficient field on a Cartesian grid, class B.

    Arrays are indexed ``[ix, iy]``; symmetry is structural (a12 stored
    once), ``det A = 1`` and uniform ellipticity are validated.
    """

    x: np.ndarray
    y: np.ndarray
    a11: np.ndarray
    a12: np.ndarray
    a22: np.ndarray
    holder_exponent: float = 1.0

    @classmethod
    def identity(cls, L=2.0, n=512):
        x, y = square_grid(L, n)
        one = np.ones((n, n))
        return cls(x, y, one, np.zeros((n, n)), one.copy())

    @classmethod
    def constant(cls, matrix, L=2.0, n=512):
        m = np.asarray(matrix, dtype=float)
        if m.shape != (2, 2) or abs(m[0, 1] - m[1, 0]) > 0:
            raise ValidationError("constant coefficient matrix must be symmetric 2x2")
        x, y = square_grid(L, n)
        full = np.full((int(n), int(n)), 1.0)
        return cls(x, y, m[0, 0] * full, m[0, 1] * full, m[1, 1] * full)

    @classmethod
    def from_function(cls, fn, L=2.0, n=512, holder_exponent=1.0):
        """``fn(z) -> (a11, a12, a22)`` evaluated on the grid (vectorized)."""
        x, y = square_grid(L, n)
        X, Y = np.meshgrid(x, y, indexing="ij")
        a11, a12, a22 = fn(X + 1j * Y)
        shape = (int(n), int(n))
        return cls(x, y, np.broadcast_to(a11, shape).copy(),
                   np.broadcast_to(a12, shape).copy(),
                   np.broadcast_to(a22, shape).copy(),
                   holder_exponent=holder_exponent)

    def validate(self, det_tol=1e-10, ellipticity=1e-8, max_report=10):
        """Raise ValidationError listing offending grid points."""
        det = self.a11 * self.a22 - self.a12**2
        tr = self.a11 + self.a22
        lam_min = 0.5 * (tr - np.sqrt(np.maximum(tr**2 - 4.0 * det, 0.0)))
        bad = (np.abs(det - 1.0) > det_tol) | (lam_min < ellipticity)
        if np.any(bad):
            idx = np.argwhere(bad)[:max_report]
            pts = [complex(self.x[i], self.y[j]) for i, j in idx]
            raise ValidationError(
                f"matrix field violates class B at {int(bad.sum())} grid points",
                points=[[p.real, p.imag] for p in pts],
            )
        return self

    def evaluator(self, name):
        return _Spline2(self.x, self.y, getattr(self, name))

    def eigen_range(self):
        det = self.a11 * self.a22 - self.a12**2
        tr = self.a11 + self.a22
        root = np.sqrt(np.maximum(tr**2 - 4.0 * det, 0.0))
        return float(np.min(0.5 * (tr - root))), float(np.max(0.5 * (tr + root)))


@dataclass
class BeltramiField:
    """Complex dilatation samples on a Cartesian grid with sup-norm < 1."""

    x: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    support_radius: float = None

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=complex)
        self.k = float(np.max(np.abs(self.mu)))
        if self.k >= 1.0:
            raise DegeneracyError(f"Beltrami coefficient degenerate: sup |mu| = {self.k}")

    @classmethod
    def from_function(cls, fn, L=2.0, n=512, support_radius=None):
        x, y = square_grid(L, n)
        return cls(x, y, _as_field_values(fn, x, y), support_radius=support_radius)

    @property
    def L(self):
        return float(-self.x[0])

    @property
    def n(self):
        return len(self.x)

    def evaluator(self):
        return _Spline2(self.x, self.y, self.mu)

    def to_csv(self, prefix, tolerances=None):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        data = np.column_stack(
            [X.ravel(), Y.ravel(), self.mu.real.ravel(), self.mu.imag.ravel()]
        )
        np.savetxt(f"{prefix}.csv", data, fmt="%.17g", delimiter=",",
                   header="x,y,re,im", comments="")
        header = {"L": self.L, "N": self.n, "k": self.k,
                  "tolerances": tolerances or {}}
        with open(f"{prefix}.json", "w") as fh:
            json.dump(header, fh, indent=1, sort_keys=True)
            fh.write("\n")


def mu_from_A(A):
    """Beltrami coefficient of a class-B matrix field (validates first)."""
    A.validate()
    det = A.a11 * A.a22 - A.a12**2
    tr = A.a11 + A.a22
    mu = (A.a22 - A.a11 - 2j * A.a12) / (1.0 + tr + det)
    return BeltramiField(A.x, A.y, mu)


def A_from_mu(mu_field):
    """Class-B matrix field of a nondegenerate Beltrami coefficient.

    ``det A = 1`` holds as an algebraic identity of the formulas.
    """
    mu = mu_field.mu
    if np.max(np.abs(mu)) >= 1.0:
        raise DegeneracyError("A_from_mu requires sup |mu| < 1")
    d = 1.0 - np.abs(mu) ** 2
    return MatrixFieldA(
        mu_field.x, mu_field.y,
        a11=np.abs(1.0 - mu) ** 2 / d,
        a12=-2.0 * mu.imag / d,
        a22=np.abs(1.0 + mu) ** 2 / d,
    )


def K_mu(mu_field):
    """Pointwise distortion bound (1+|mu|)/(1-|mu|) and its sup."""
    a = np.abs(mu_field.mu)
    K = (1.0 + a) / (1.0 - a)
    return K, float(np.max(K))


def estimate_holder(field_values, x, y, alpha, n_pairs=2000, seed=0):
    """Holder-constant estimate: max ratio |df| / d^alpha over sampled pairs
    at dyadic distances.  A cheap certificate, documented as an estimate."""
    rng = np.random.default_rng(seed)
    n = len(x)
    v = np.asarray(field_values)
    i1 = rng.integers(1, n - 1, n_pairs)
    j1 = rng.integers(1, n - 1, n_pairs)
    best = 0.0
    h = x[1] - x[0]
    for shift in (1, 2, 4, 8, 16):
        i2 = np.clip(i1 + shift, 0, n - 1)
        d = np.abs(v[i2, j1] - v[i1, j1])
        best = max(best, float(np.max(d / (shift * h) ** alpha)))
    return best


def radial_cutoff(r, r1, R):
    """Smooth transition: 1 for r <= r1, 0 for r >= R."""
    r = np.asarray(r, dtype=float)
    t = np.clip((r - r1) / (R - r1), 0.0, 1.0)

    def sigma(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    s1, s0 = sigma(1.0 - t), sigma(t)
    return s1 / (s1 + s0 + 1e-300)


def extend_mu(mu, R=1.5, L=2.0, n=512, domain_radius=1.0, center=0.0 + 0.0j):
    """Extend a dilatation given on the closed disk to the plane.

    Nearest-boundary-point (radial) constant extension multiplied by a
    smooth radial cutoff: equals ``mu`` on the domain exactly, vanishes for
    ``|z - center| >= R``, and never increases the sup norm.
    """
    if not (domain_radius < R < L):
        raise ConfigurationError(
            f"need domain_radius < R < L, got {domain_radius}, {R}, {L}"
        )
    if callable(mu):
        mu_eval = mu
    elif isinstance(mu, BeltramiField):
        mu_eval = mu.evaluator()
    else:
        raise ConfigurationError("mu must be callable or a BeltramiField")
    x, y = square_grid(L, n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    Z = X + 1j * Y
    rel = Z - center
    r = np.abs(rel)
    inside = r <= domain_radius
    proj = np.where(inside, Z, center + domain_radius * rel / np.maximum(r, 1e-300))
    vals = np.asarray(mu_eval(proj), dtype=complex)
    vals = np.where(inside, vals, vals * radial_cutoff(r, domain_radius, R))
    return BeltramiField(x, y, vals, support_radius=R)


@dataclass
class QCMap:
    """Grid quasiconformal map with derivatives, Jacobian and inverse."""

    x: np.ndarray
    y: np.ndarray
    h_values: np.ndarray
    hz_values: np.ndarray
    hzb_values: np.ndarray
    residual_sup: float
    iterations: int
    _corr: object = field(default=None, repr=False)
    _hz: object = field(default=None, repr=False)
    _hzb: object = field(default=None, repr=False)

    def __post_init__(self):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        Z = X + 1j * Y
        # interpolate the decaying correction h - z (and hz - 1), not h itself
        self._corr = _Spline2(self.x, self.y, self.h_values - Z)
        self._hz = _Spline2(self.x, self.y, self.hz_values - 1.0)
        self._hzb = _Spline2(self.x, self.y, self.hzb_values)

    @property
    def jacobian_values(self):
        return np.abs(self.hz_values) ** 2 - np.abs(self.hzb_values) ** 2

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return z + self._corr(z)

    def h_z(self, z):
        return 1.0 + self._hz(z)

    def h_zbar(self, z):
        return self._hzb(z)

    def jacobian(self, z):
        return np.abs(self.h_z(z)) ** 2 - np.abs(self.h_zbar(z)) ** 2

    def directional(self, z, omega):
        """Directional derivative h_omega = h_z omega + h_zbar conj(omega);
        nonvanishing wherever the Jacobian is positive."""
        omega = np.asarray(omega, dtype=complex)
        if np.max(np.abs(np.abs(omega) - 1.0)) > 1e-9:
            raise DomainError("direction must be unimodular")
        return self.h_z(z) * omega + self.h_zbar(z) * np.conj(omega)

    def inverse(self, w, tol=1e-12, max_iters=50, stride=4):
        """h^{-1}(w) by coarse grid search plus Newton refinement."""
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        hg = self.h_values[::stride, ::stride].ravel()
        X, Y = np.meshgrid(self.x[::stride], self.y[::stride], indexing="ij")
        zg = (X + 1j * Y).ravel()
        z = zg[np.argmin(np.abs(hg[None, :] - w[:, None]), axis=1)]
        scale = max(1.0, float(np.max(np.abs(w))))
        for _ in range(max_iters):
            res = self(z) - w
            if np.max(np.abs(res)) < tol * scale:
                break
            hz = self.h_z(z)
            hzb = self.h_zbar(z)
            J = np.abs(hz) ** 2 - np.abs(hzb) ** 2
            dz = (np.conj(hz) * res - hzb * np.conj(res)) / J
            z = z - dz
        else:
            raise ConvergenceError("QC map inversion stalled")
        return z

    def distortion_sup(self, radius):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        m = (X * X + Y * Y) <= radius * radius
        num = np.abs(self.hz_values[m]) + np.abs(self.hzb_values[m])
        den = np.abs(self.hz_values[m]) - np.abs(self.hzb_values[m])
        return float(np.max(num / den))

    def to_csv(self, prefix, tolerances=None):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        data = np.column_stack(
            [X.ravel(), Y.ravel(), self.h_values.real.ravel(), self.h_values.imag.ravel()]
        )
        np.savetxt(f"{prefix}.csv", data, fmt="%.17g", delimiter=",",
                   header="x,y,re,im", comments="")
        header = {
            "L": float(-self.x[0]), "N": len(self.x),
            "k": float(np.max(np.abs(self.hzb_values) / np.abs(self.hz_values))),
            "residual_sup": self.residual_sup, "iterations": self.iterations,
            "tolerances": tolerances or {},
        }
        with open(f"{prefix}.json", "w") as fh:
            json.dump(header, fh, indent=1, sort_keys=True)
            fh.write("\n")


def directional_derivative_h(qcmap, z, omega):
    """Module-level alias for QCMap.directional."""
    return qcmap.directional(z, omega)


def solve_beltrami(mu_field, tol=1e-10, max_iters=None):
    """Principal solution of ``h_zbar = mu h_z`` on the periodic grid.

    Requires compactly supported ``mu`` with ``k < 1``; iterates
    ``omega <- mu (1 + B[omega])`` until the grid-RMS update drops below
    ``tol``, then reconstructs ``h = z + C[omega]``.  The a-posteriori
    residual ``sup |h_zbar - mu h_z|`` is stored on the result.
    """
    mu = mu_field.mu
    n = mu_field.n
    L = mu_field.L
    k = mu_field.k
    if k >= 1.0:
        raise DegeneracyError("nondegeneracy requires k < 1")
    if mu_field.support_radius is not None and mu_field.support_radius >= L:
        raise ConfigurationError("support must lie inside the computational square")

    kx = 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * L / n)
    KX, KY = np.meshgrid(kx, kx, indexing="ij")
    xi = KX + 1j * KY
    with np.errstate(divide="ignore", invalid="ignore"):
        beurling = np.where(xi == 0, 0.0, np.conj(xi) / xi)
        cauchy = np.where(xi == 0, 0.0, -2j / xi)

    def B(f):
        return np.fft.ifft2(beurling * np.fft.fft2(f))

    if max_iters is None:
        max_iters = 200 if k == 0 else max(20, int(np.log(tol) / np.log(max(k, 1e-3))) + 30)

    omega = mu.copy()
    if k == 0.0:
        omega = np.zeros_like(mu)
        iterations = 0
    else:
        last = np.inf
        stall = 0
        for iterations in range(1, max_iters + 1):
            new = mu * (1.0 + B(omega))
            delta = float(np.sqrt(np.mean(np.abs(new - omega) ** 2)))
            omega = new
            if delta < tol:
                break
            if delta > 0.999 * last:
                stall += 1
                if stall >= 5:
                    raise ConvergenceError(
                        "Beltrami iteration stalled",
                        k=k, grid=n, delta=delta, iterations=iterations,
                    )
            else:
                stall = 0
            last = delta
        else:
            raise ConvergenceError(
                "Beltrami iteration exceeded max_iters",
                k=k, grid=n, iterations=max_iters,
            )

    hz = 1.0 + B(omega)
    hzb = omega
    # the periodic dbar-inverse only sees the mean-free part of omega; the
    # mean integrates to an exact conj(z) term (dbar(c zbar) = c), without
    # which the reconstructed map would not match its own derivative fields
    c0 = np.mean(omega)
    corr = np.fft.ifft2(cauchy * np.fft.fft2(omega))
    X, Y = np.meshgrid(mu_field.x, mu_field.y, indexing="ij")
    h = X + 1j * Y + c0 * (X - 1j * Y) + corr
    residual = float(np.max(np.abs(hzb - mu * hz)))
    return QCMap(
        x=mu_field.x, y=mu_field.y, h_values=h, hz_values=hz, hzb_values=hzb,
        residual_sup=residual, iterations=iterations,
    )
