"""Riemann maps for star-like domains and the Jordan-domain solvers.

The built-in mapper is a Theodorsen fixed-point iteration on the boundary
correspondence: for a curve given in polar form ``rho(theta)`` about an
interior center, ``log((omega^{-1}(w) - center)/w)`` is analytic in the
disk, so the correspondence ``theta(psi)`` satisfies

    theta(psi) = psi + H[log rho(theta(.))](psi)

with ``H`` the circle conjugation operator.  Once the correspondence has
converged, the Taylor coefficients of ``omega^{-1}`` come from one FFT of
the boundary samples, interior evaluation is series evaluation, and the
forward map is Newton inversion of the series.  Domains that are not
star-like enter only through closed-form overrides.

The directional-derivative problem on the domain reduces to a disk problem:
transport the direction field and data through the boundary correspondence,
solve the Riemann-Hilbert problem on the disk for ``G``, and integrate
``G * (omega^{-1})'`` to obtain ``F`` with ``u = Re(F o omega)`` and
``conj(grad u) = G o omega``.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .analytic import (
    AnalyticRep,
    LogTerm,
    divided_difference_series,
    series_product,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    InternalConsistencyError,
    UnsupportedDomainError,
)
from .geometry import BoundaryData, DirectionField, JordanCurve, normal_field
from .riemann_hilbert import conjugate_operator, solve_rh

TWO_PI = 2.0 * np.pi


class _PeriodicInterp:
    """PCHIP interpolation of samples with ``y(x + 2*pi) = y(x) + jump``.

    ``x`` must be strictly increasing (unwrapped) and span less than one
    period; the closing knot ``(x0 + 2*pi, y0 + jump)`` is appended.
    """

    def __init__(self, x, y, jump=0.0):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if np.any(np.diff(x) <= 0) or x[-1] >= x[0] + TWO_PI:
            raise InternalConsistencyError("periodic knots must increase within one period")
        self.x0 = x[0]
        self.jump = jump
        xx = np.concatenate([x, [x[0] + TWO_PI]])
        yy = np.concatenate([y, [y[0] + jump]])
        self._p = PchipInterpolator(xx, yy)

    def __call__(self, xq):
        xq = np.asarray(xq, dtype=float)
        k = np.floor((xq - self.x0) / TWO_PI)
        return self._p(xq - k * TWO_PI) + k * self.jump


@dataclass
class ConformalMap:
    """Boundary correspondence plus interior evaluators for ``omega: D -> disk``.

    ``psi_at_t[j] = arg omega(z(t_j))`` (unwrapped, strictly increasing).
    ``invmap_coeffs`` are the Taylor coefficients of ``omega^{-1}`` about 0.
    """

    center: complex
    t: np.ndarray
    psi_at_t: np.ndarray
    invmap_coeffs: np.ndarray
    analyticity_defect: float = 0.0
    closed_form: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.diff(np.concatenate([self.psi_at_t, [self.psi_at_t[0] + TWO_PI]]))
        if np.any(d <= 0):
            raise InternalConsistencyError(
                "boundary correspondence is not strictly increasing"
            )
        self._psi_of_t = _PeriodicInterp(self.t, self.psi_at_t, jump=TWO_PI)
        self._t_of_psi = _PeriodicInterp(self.psi_at_t, self.t, jump=TWO_PI)

    # -- correspondence -----------------------------------------------------

    def psi(self, t):
        return self._psi_of_t(t)

    def t_from_psi(self, psi):
        return self._t_of_psi(psi)

    # -- inverse map (disk -> domain) ----------------------------------------

    def invmap(self, w):
        if "invmap" in self.closed_form:
            return self.closed_form["invmap"](np.asarray(w, dtype=complex))
        return np.polynomial.polynomial.polyval(
            np.asarray(w, dtype=complex), self.invmap_coeffs
        )

    def invmap_prime(self, w):
        if "invmap_prime" in self.closed_form:
            return self.closed_form["invmap_prime"](np.asarray(w, dtype=complex))
        c = self.invmap_coeffs
        dc = c[1:] * np.arange(1, len(c))
        return np.polynomial.polynomial.polyval(np.asarray(w, dtype=complex), dc)

    def invmap_prime_coeffs(self):
        c = self.invmap_coeffs
        return c[1:] * np.arange(1, len(c))

    # -- forward map (domain -> disk) ----------------------------------------

    def forward(self, z, tol=1e-12, max_iters=60, accept=1e-8):
        """omega(z) by Newton inversion of the inverse-map series.

        Converges quadratically from a correspondence-based seed; stops at
        ``tol`` or at the map's own accuracy floor, and raises only when the
        residual stays above ``accept`` (relative to the domain scale).
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if "forward" in self.closed_form:
            return self.closed_form["forward"](z)
        scale = max(1.0, float(np.max(np.abs(z - self.center))))
        # seed from the polar representation through the correspondence
        rel = z - self.center
        theta = np.angle(rel)
        rho_b = np.abs(self.invmap(np.exp(1j * self.psi(theta))) - self.center)
        r0 = np.clip(np.abs(rel) / np.maximum(rho_b, 1e-300), 0.0, 1.0)
        w = r0 * np.exp(1j * self.psi(theta))
        best = np.inf
        for _ in range(max_iters):
            res = self.invmap(w) - z
            r = float(np.max(np.abs(res)))
            if r < tol * scale or r > 0.5 * best:
                break
            best = r
            w = w - res / self.invmap_prime(w)
            a = np.abs(w)
            w = np.where(a > 1.0, w / a, w)
        if float(np.max(np.abs(self.invmap(w) - z))) > accept * scale:
            raise ConvergenceError("forward map Newton iteration stalled")
        return w

    def forward_prime(self, z):
        w = self.forward(z)
        return 1.0 / self.invmap_prime(w)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self):
        return {
            "theta": [float(v) for v in self.t],
            "psi": [float(v) for v in self.psi_at_t],
            "center": [self.center.real, self.center.imag],
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def riemann_map(curve, center=None, tol=1e-10, max_iters=400):
    """Theodorsen map of a star-like C1 curve onto the unit disk.

    Normalization: ``omega(center) = 0`` and ``(omega^{-1})'(0) > 0``.
    Raises ``UnsupportedDomainError`` when the curve is not star-like about
    the center, ``ConvergenceError`` when the iteration stalls.
    """
    n = curve.size
    z_c = complex(center) if center is not None else curve.interior_point()
    rel = curve.z - z_c
    theta = np.unwrap(np.angle(rel))
    if np.any(np.diff(theta) <= 0) or theta[-1] >= theta[0] + TWO_PI:
        raise UnsupportedDomainError(
            "curve is not star-like about the chosen center"
        )
    rho = np.abs(rel)
    log_rho = _PeriodicInterp(theta, np.log(rho))

    psi = TWO_PI * np.arange(n) / n
    th = psi.copy()
    for _ in range(max_iters):
        eps = conjugate_operator(log_rho(th)).phi
        th_new = psi + eps
        delta = float(np.max(np.abs(th_new - th)))
        th = th_new
        if delta < tol:
            break
    else:
        raise ConvergenceError(
            f"Theodorsen iteration did not reach {tol:g} in {max_iters} steps",
            last_delta=delta,
        )
    if np.any(np.diff(th) <= 0):
        raise InternalConsistencyError("Theodorsen correspondence not monotone")

    boundary = z_c + np.exp(log_rho(th) + 1j * th)
    beta = np.fft.fft(boundary) / n
    k = n // 2
    defect = float(np.max(np.abs(beta[k:]))) if len(beta) > k else 0.0
    coeffs = np.zeros(k, dtype=complex)
    coeffs[0] = z_c
    coeffs[1:] = beta[1:k]

    # correspondence at the curve's own parameters: invert theta(psi)
    psi_of_theta = _PeriodicInterp(th, psi, jump=TWO_PI)
    psi_at_t = np.asarray(psi_of_theta(theta), dtype=float)
    return ConformalMap(
        center=z_c,
        t=curve.t.copy(),
        psi_at_t=psi_at_t,
        invmap_coeffs=coeffs,
        analyticity_defect=defect,
    )


def limacon_map(curve, a):
    """Closed-form map for the limacon ``z(t) = e^{it} + a e^{2it}``:
    ``omega^{-1}(w) = w + a w^2`` and ``omega(z) = (sqrt(1 + 4 a z) - 1)/(2a)``."""
    if not abs(a) < 0.5:
        raise ConfigurationError("limacon closed form needs |a| < 1/2")
    n = curve.size
    coeffs = np.zeros(n // 2, dtype=complex)
    coeffs[1] = 1.0
    coeffs[2] = a
    return ConformalMap(
        center=0.0 + 0.0j,
        t=curve.t.copy(),
        psi_at_t=curve.t.copy(),
        invmap_coeffs=coeffs,
        closed_form={
            "invmap": lambda w: w + a * w * w,
            "invmap_prime": lambda w: 1.0 + 2.0 * a * w,
            "forward": lambda z: (np.sqrt(1.0 + 4.0 * a * z) - 1.0) / (2.0 * a),
        },
    )


def transport_data(cmap, nu, phi):
    """Pull a direction field and boundary data back to the unit circle.

    Resamples through the inverse boundary correspondence with monotone
    cubic interpolation; the direction field is interpolated in its
    unwrapped argument (keeping |nu| = 1 and the winding number), masks map
    to their nearest pulled-back grid index.
    """
    n = len(cmap.t)
    if nu.size != n or phi.size != n:
        raise ConfigurationError("transport requires data sampled on the map's curve")
    psi_grid = TWO_PI * np.arange(n) / n
    t_pull = cmap.t_from_psi(psi_grid)

    ang = np.unwrap(np.angle(nu.nu))
    ang_interp = _PeriodicInterp(nu.t, ang, jump=TWO_PI * nu.winding)
    nu_pull = np.exp(1j * ang_interp(t_pull))

    phi_interp = _PeriodicInterp(phi.t, phi.effective_samples())
    phi_pull = np.asarray(phi_interp(t_pull), dtype=float)

    mask_pull = np.zeros(n, dtype=bool)
    if phi.mask.any():
        psi_masked = np.asarray(cmap.psi(phi.t[phi.mask])) % TWO_PI
        idx = np.rint(psi_masked / (TWO_PI / n)).astype(int) % n
        mask_pull[idx] = True
    return DirectionField(nu=nu_pull), BoundaryData(phi=phi_pull, mask=mask_pull)


@dataclass(frozen=True)
class JordanSolution:
    """Harmonic solution on a Jordan domain, held in disk coordinates.

    ``u(z) = Re F(omega(z))`` and ``conj(grad u)(z) = G(omega(z))`` where
    ``G`` solves the transported Riemann-Hilbert problem on the disk and
    ``F`` integrates ``G * (omega^{-1})'``.
    """

    curve: JordanCurve
    cmap: ConformalMap
    G: AnalyticRep
    F: AnalyticRep
    nu: DirectionField
    phi: BoundaryData
    phi_disk: BoundaryData
    xi0: complex

    def u(self, z):
        return np.real(self.F(self.cmap.forward(z)))

    def grad(self, z):
        """Gradient ``u_x + i u_y`` on the domain."""
        return np.conj(self.G(self.cmap.forward(z)))

    def u_disk(self, w):
        """u at the preimage ``omega^{-1}(w)``; exact disk-side evaluation."""
        return np.real(self.F(w))

    def residual_report(self, depth=13, exclusion_radius=0.1):
        """Boundary residual of ``<nu, grad u>`` against ``phi`` at the curve
        samples, approached through the disk side of the composition."""
        n = self.curve.size
        xi = np.exp(1j * np.asarray(self.cmap.psi_at_t))
        keep = ~self.phi.mask
        keep &= np.abs(xi - self.xi0) > exclusion_radius
        e = [
            np.real(self.nu.nu * self.G((1.0 - 2.0**-k) * xi))
            for k in (depth - 2, depth - 1, depth)
        ]
        est = e[0] / 3.0 - 2.0 * e[1] + (8.0 / 3.0) * e[2]
        dev = np.abs(est - self.phi.phi)[keep]
        from .riemann_hilbert import ResidualReport

        return ResidualReport(
            max_abs=float(np.max(dev)) if dev.size else 0.0,
            mean_abs=float(np.mean(dev)) if dev.size else 0.0,
            n_probes=int(keep.sum()),
            n_excluded=int(n - keep.sum()),
            radius=1.0 - 2.0**-depth,
        )

    def interior_grid(self, radius=0.9, nr=12, ntheta=64):
        """Points inside the domain, imaged from a polar grid in the disk."""
        r = np.linspace(radius / nr, radius, nr)
        th = TWO_PI * np.arange(ntheta) / ntheta
        w = (r[:, None] * np.exp(1j * th[None, :])).ravel()
        return self.cmap.invmap(w), w


def _integrate_product(G, w_coeffs, nterms):
    """Indefinite integral of ``G(z) * W(z)`` where W is a Taylor series.

    Pole terms split as ``W(z) = W(zeta0) + (W(z) - W(zeta0))``: the first
    part integrates to a log term, the remainder is an analytic divided
    difference that joins the series part.
    """
    series = series_product(G.coeffs, w_coeffs, nterms)
    logs = []
    for p in G.poles:
        if p.order != 1:
            raise NotImplementedError("only first-order poles arise here")
        w_at = complex(np.polynomial.polynomial.polyval(p.zeta0, w_coeffs))
        logs.append(LogTerm(p.zeta0, -p.gamma * w_at * p.zeta0))
        d = divided_difference_series(w_coeffs, p.zeta0, nterms)
        series = series - p.gamma * p.zeta0 * d
    ic = np.zeros(nterms + 1, dtype=complex)
    ic[1:] = series / np.arange(1, nterms + 1)
    return AnalyticRep(ic, logs=tuple(logs))


def solve_directional_jordan(curve, nu, phi, t0=0.0, cmap=None, map_quality_tol=1e-6):
    """Directional-derivative problem on an almost smooth Jordan domain.

    ``t0`` is the curve parameter carrying the corrector (transported to the
    disk-side anchor ``xi0 = e^{i psi(t0)}``).  A precomputed or closed-form
    ``cmap`` overrides the built-in Theodorsen mapper.  The map is rejected
    when its boundary correspondence fails to reproduce the curve samples to
    ``map_quality_tol`` (relative to the curve scale); callers whose curves
    carry known numerical noise may loosen this gate.
    """
    if cmap is None:
        cmap = riemann_map(curve)
    reproduction = cmap.invmap(np.exp(1j * np.asarray(cmap.psi_at_t))) - curve.z
    scale = max(1e-300, float(np.max(np.abs(curve.z - cmap.center))))
    quality = float(np.max(np.abs(reproduction))) / scale
    if quality > map_quality_tol:
        raise ConvergenceError(
            "Riemann map does not reproduce the boundary to tolerance",
            quality=quality, tol=map_quality_tol,
        )
    nu_disk, phi_disk = transport_data(cmap, nu, phi)
    xi0 = np.exp(1j * complex(cmap.psi(float(t0))))
    G = solve_rh(nu_disk, phi_disk, xi0)
    k = len(G.coeffs)
    F = _integrate_product(G, cmap.invmap_prime_coeffs(), k)
    return JordanSolution(
        curve=curve, cmap=cmap, G=G, F=F, nu=nu, phi=phi, phi_disk=phi_disk, xi0=xi0
    )


@dataclass(frozen=True)
class BoundaryLimitReport:
    """Boundary limit quantities at probe parameters."""

    t_probes: np.ndarray
    normal_limits: np.ndarray
    normal_derivatives: np.ndarray
    nontangential_derivatives: np.ndarray
    converged: np.ndarray

    def to_json_dict(self):
        return {
            "t_probes": self.t_probes.tolist(),
            "normal_limits": self.normal_limits.tolist(),
            "normal_derivatives": self.normal_derivatives.tolist(),
            "nontangential_derivatives": self.nontangential_derivatives.tolist(),
            "converged": self.converged.astype(bool).tolist(),
        }


def _richardson(vals):
    """Two-column Richardson table for geometrically halved steps."""
    v = np.asarray(vals, float)
    w1 = 2.0 * v[1:] - v[:-1]
    w2 = (4.0 * w1[1:] - w1[:-1]) / 3.0
    return float(w2[-1]), float(abs(w2[-1] - w2[-2])) if len(w2) >= 2 else float("nan")


def boundary_limits(sol, probe_indices, depths=(7, 12), tol=1e-5):
    """Normal limit of u, difference-quotient normal derivative, and
    nontangential derivative limit at selected curve samples."""
    curve = sol.curve
    n_lim, n_der, nt_der, conv = [], [], [], []
    rs = 1.0 - 2.0 ** -np.arange(depths[0], depths[1] + 1, dtype=float)
    ts = 2.0 ** -np.arange(depths[0], depths[1] + 1, dtype=float)
    for j in probe_indices:
        xi = np.exp(1j * sol.cmap.psi_at_t[j])
        u_vals = [float(sol.u_disk(r * xi)) for r in rs]
        ulim, du = _richardson(u_vals)
        der_vals = [
            float(np.real(sol.nu.nu[j] * sol.G(r * xi))) for r in rs
        ]
        dlim, dd = _richardson(der_vals)
        zpts = curve.z[j] + ts * curve.n[j]
        q_vals = (np.asarray(sol.u(zpts), dtype=float) - ulim) / ts
        qlim, dq = _richardson(q_vals)
        n_lim.append(ulim)
        n_der.append(qlim)
        nt_der.append(dlim)
        conv.append(max(du, dd, dq) < tol)
    return BoundaryLimitReport(
        t_probes=curve.t[np.asarray(probe_indices, int)],
        normal_limits=np.asarray(n_lim),
        normal_derivatives=np.asarray(n_der),
        nontangential_derivatives=np.asarray(nt_der),
        converged=np.asarray(conv),
    )


def solve_neumann_jordan(curve, phi, t0=0.0, cmap=None):
    """Neumann problem on a Jordan domain: the directional problem along the
    interior normal field."""
    return solve_directional_jordan(curve, normal_field(curve), phi, t0=t0, cmap=cmap)
