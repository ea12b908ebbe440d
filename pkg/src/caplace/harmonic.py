"""Harmonic solutions of the directional-derivative problem on the disk.

``solve_directional_disk`` integrates the Riemann-Hilbert solution ``f``
(with ``f = conj(grad u)``) into ``F`` and returns ``u = Re F`` normalized
by ``u(0) = 0``.  The limit evaluators estimate radial limits,
nontangential derivative traces and difference-quotient normal derivatives
by Richardson extrapolation over dyadic approach depths.
"""

from dataclasses import dataclass

import numpy as np

from .analytic import AnalyticRep, integrate_analytic
from .geometry import BoundaryData, DirectionField, normal_field, stolz_points, unit_circle
from .riemann_hilbert import boundary_residual, solve_rh
from .validation import check_unimodular

CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class HarmonicSolution:
    """Harmonic ``u = Re F`` with gradient recovered from ``f = conj(grad u)``."""

    F: AnalyticRep
    f: AnalyticRep
    nu: DirectionField
    phi: BoundaryData
    zeta0: complex

    def u(self, z):
        return np.real(self.F(z))

    def grad(self, z):
        """Gradient in complex form ``u_x + i u_y = conj(f(z))``."""
        return np.conj(self.f(z))

    def directional(self, z, direction):
        """Directional derivative ``<direction, grad u> = Re(direction * f)``."""
        return np.real(np.asarray(direction) * self.f(z))

    def boundary_direction(self, zeta):
        """Direction field value at an arbitrary boundary point, by periodic
        interpolation of the reduced argument."""
        zeta = check_unimodular(zeta, name="zeta")
        theta = float(np.angle(zeta)) % (2.0 * np.pi)
        t = self.nu.t
        s = self.nu.reduced_argument
        t_ext = np.concatenate([t, t[:1] + 2.0 * np.pi])
        s_ext = np.concatenate([s, s[:1]])
        sv = float(np.interp(theta, t_ext, s_ext))
        return np.exp(1j * (self.nu.winding * theta + sv))

    def residual_report(self, **kw):
        return boundary_residual(self.f, self.nu, self.phi, **kw)


def solve_directional_disk(nu, phi, zeta0=1.0 + 0.0j):
    """Harmonic u on the disk with ``d u / d nu -> phi`` nontangentially a.e.

    The data may violate the classical compatibility condition; the defect
    is absorbed at ``zeta0`` and the boundary relation then holds at every
    unmasked continuity point except ``zeta0``.
    """
    f = solve_rh(nu, phi, zeta0)
    F = integrate_analytic(f)
    return HarmonicSolution(F=F, f=f, nu=nu, phi=phi, zeta0=check_unimodular(zeta0))


def solve_neumann_disk(phi, zeta0=1.0 + 0.0j):
    """Neumann problem: directional problem along the interior normal -zeta."""
    if not isinstance(phi, BoundaryData):
        phi = BoundaryData(phi=np.asarray(phi, dtype=float))
    nu = normal_field(unit_circle(phi.size))
    return solve_directional_disk(nu, phi, zeta0)


@dataclass(frozen=True)
class LimitEstimate:
    """Richardson-extrapolated limit with a convergence indicator."""

    value: float
    converged: bool
    diverged: bool
    history: np.ndarray

    def __float__(self):
        return float(self.value)


def _extrapolate(values):
    v = np.asarray(values, dtype=float)
    w = 2.0 * v[1:] - v[:-1]
    deltas = np.abs(np.diff(v))
    converged = bool(abs(w[-1] - w[-2]) < CONVERGENCE_TOL) if len(w) >= 2 else False
    diverged = False
    if not converged and len(deltas) >= 2 and deltas[-2] > 0:
        diverged = bool(deltas[-1] >= 0.9 * deltas[-2])
    return LimitEstimate(
        value=float(w[-1]), converged=converged, diverged=diverged, history=v
    )


def nontangential_derivative_trace(sol, zeta, kappa=0.5, depths=(8, 12)):
    """Limit of ``<nu(zeta), grad u>`` along Stolz points at ``zeta``.

    Non-convergence signals that ``zeta`` lies in the exceptional set.
    """
    zeta = check_unimodular(zeta, name="zeta")
    nu_z = sol.boundary_direction(zeta)
    pts = stolz_points(zeta, kappa, depths[1] - depths[0] + 1, start_depth=depths[0])
    vals = [float(np.real(nu_z * sol.f(p))) for p in pts]
    return _extrapolate(vals)


def radial_limit(sol, zeta, depths=(6, 13)):
    """Limit of ``u(r zeta)`` as r -> 1; flags divergence (log blow-ups at
    corrector anchors) instead of raising."""
    zeta = check_unimodular(zeta, name="zeta")
    r = 1.0 - 2.0 ** -np.arange(depths[0], depths[1] + 1, dtype=float)
    vals = [float(sol.u(ri * zeta)) for ri in r]
    return _extrapolate(vals)


def normal_derivative_pointwise(sol, zeta, depths=(6, 12)):
    """Difference-quotient normal derivative
    ``lim (u(zeta + t n) - u(zeta)) / t`` with ``n = -zeta``.

    Requires the boundary value ``u(zeta)`` (a finite radial limit);
    propagates its divergence flag.
    """
    zeta = check_unimodular(zeta, name="zeta")
    u_b = radial_limit(sol, zeta)
    if u_b.diverged or not u_b.converged:
        return LimitEstimate(
            value=float("nan"), converged=False, diverged=u_b.diverged,
            history=u_b.history,
        )
    t = 2.0 ** -np.arange(depths[0], depths[1] + 1, dtype=float)
    vals = [float((sol.u(zeta * (1.0 - ti)) - u_b.value) / ti) for ti in t]
    return _extrapolate(vals)


def export_solution_csv(path, points, u_vals, grad_vals):
    """Write columns x, y, u, ux, uy with 17 significant digits."""
    pts = np.asarray(points, dtype=complex)
    g = np.asarray(grad_vals, dtype=complex)
    data = np.column_stack(
        [pts.real, pts.imag, np.asarray(u_vals, float), g.real, g.imag]
    )
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="x,y,u,ux,uy", comments="")


def disk_grid(radius=0.9, nr=16, ntheta=64):
    """Polar evaluation grid inside the disk (excludes the origin ring)."""
    r = np.linspace(radius / nr, radius, nr)
    th = 2.0 * np.pi * np.arange(ntheta) / ntheta
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()
