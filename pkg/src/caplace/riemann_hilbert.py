"""Schwarz-operator machinery and the constructive Riemann-Hilbert solver.

The boundary problem is ``Re(nu(zeta) * f(z)) -> phi(zeta)`` nontangentially
at almost every boundary point of the unit disk.  The construction factors
``nu(zeta) = zeta^m * e^{i s(theta)}`` with the winding number ``m`` and the
single-valued reduced argument ``s``, then:

* ``p = S[s]`` (Schwarz operator) gives the analytic phase; with
  ``g = e^{ip} f`` the condition becomes ``Re(zeta^m g) = psi`` where
  ``psi = phi * e^{-Im p}``.
* ``m = 0``:  ``g = S[psi]``.
* ``m = 1``:  the zero-mean part of ``psi`` is matched coefficient-wise,
  while the mean -- the classical compatibility defect -- is absorbed by a
  corrector pole anchored at a prescribed boundary point ``zeta0``.  The
  corrector's boundary condition holds everywhere except at ``zeta0``
  itself, a single point and hence a set of logarithmic capacity zero.

Only windings 0 and 1 are supported; higher index would need several
correctors and negative index has classical obstructions this construction
does not address.
"""

import json
from dataclasses import dataclass

import numpy as np

from .analytic import (
    AnalyticRep,
    PoleTerm,
    divided_difference_series,
    exp_series,
    series_product,
)
from .errors import ConfigurationError, DataTooWildError, UnsupportedIndexError
from .geometry import BoundaryData, DirectionField
from .validation import check_aperture, check_power_of_two, check_unimodular

EXP_GUARD = 1e8


def _fourier_coeffs(samples):
    return np.fft.fft(np.asarray(samples, dtype=float)) / len(samples)


def schwarz_operator(g):
    """Analytic completion S[g] with Re S[g] -> g on the circle, Im S[g](0) = 0.

    Fourier coefficients a_k of the samples give the Taylor coefficients
    c_0 = a_0, c_k = 2 a_k (k >= 1); the truncation keeps N/2 terms.
    Reproduces trigonometric polynomials of degree < N/2 exactly:
    cos(k t) -> z^k, sin(k t) -> -i z^k.
    """
    if isinstance(g, BoundaryData):
        samples = g.phi
    else:
        samples = np.asarray(g, dtype=float)
    n = check_power_of_two(len(samples), name="sample count")
    a = _fourier_coeffs(samples)
    k = n // 2
    c = np.zeros(k, dtype=complex)
    c[0] = a[0].real
    c[1:] = 2.0 * a[1:k]
    return AnalyticRep(c)


def conjugate_operator(g):
    """Circle conjugate function (Hilbert transform): the boundary trace of
    Im S[g].  Fourier multiplier -i*sign(k); constants and the Nyquist mode
    map to zero.  Applied twice it negates zero-mean data.
    """
    if isinstance(g, BoundaryData):
        samples, mask = g.phi, g.mask
    else:
        samples, mask = np.asarray(g, dtype=float), None
    n = check_power_of_two(len(samples), name="sample count")
    gh = np.fft.fft(samples)
    mult = np.zeros(n, dtype=complex)
    mult[1 : n // 2] = -1j
    mult[n // 2 + 1 :] = 1j
    out = np.fft.ifft(mult * gh).real
    return BoundaryData(phi=out, mask=mask)


def corrector(zeta0, a):
    """Closed-form corrector ``f(z) = 2 a conj(zeta0) / (1 - conj(zeta0) z)``.

    Satisfies ``Re(-zeta * f(zeta)) = a`` at every boundary point except
    ``zeta0``: the compatibility defect of the Neumann problem is pushed
    into a single capacity-zero point.
    """
    zeta0 = check_unimodular(zeta0)
    a = float(a)
    if a == 0.0:
        return AnalyticRep(np.zeros(1, dtype=complex))
    return AnalyticRep(
        np.zeros(1, dtype=complex),
        poles=(PoleTerm(zeta0, 2.0 * a * np.conj(zeta0), 1),),
    )


def solve_rh(nu, phi, zeta0=1.0 + 0.0j):
    """Solve ``Re(nu * f) -> phi`` on the unit circle for analytic ``f``.

    Parameters
    ----------
    nu : DirectionField
        Unimodular coefficient field with winding 0 or 1.
    phi : BoundaryData
        Real boundary samples aligned with ``nu``; masked samples are
        neutralized before the transform.
    zeta0 : complex
        Corrector anchor for winding 1; the boundary condition may fail
        there (and only there).

    Returns the canonical representative: coefficient matching for the
    zero-mean part, corrector for the mean, and ``Im S[.](0) = 0`` pinning.
    The result is additive in ``phi`` for fixed ``nu`` and ``zeta0``.
    """
    if not isinstance(nu, DirectionField):
        nu = DirectionField(nu=np.asarray(nu, dtype=complex))
    if not isinstance(phi, BoundaryData):
        phi = BoundaryData(phi=np.asarray(phi, dtype=float))
    if nu.size != phi.size:
        raise ConfigurationError(
            f"direction field ({nu.size}) and data ({phi.size}) must share the grid"
        )
    zeta0 = check_unimodular(zeta0)
    m = nu.winding
    if m not in (0, 1):
        raise UnsupportedIndexError(
            f"winding number {m} outside the supported range {{0, 1}}"
        )
    n = nu.size
    k = n // 2

    s = nu.reduced_argument
    p = schwarz_operator(s)
    im_p = conjugate_operator(s).phi
    weight = np.exp(-im_p)
    if np.max(weight) > EXP_GUARD:
        raise DataTooWildError(
            f"phase weight e^(-Im p) reaches {np.max(weight):.3g} > {EXP_GUARD:.0e}"
        )
    psi = phi.effective_samples() * weight

    q = exp_series(-1j * p.coeffs, k)  # Taylor coefficients of e^{-ip}

    if m == 0:
        g = schwarz_operator(psi)
        f_coeffs = series_product(q, g.coeffs, k)
        return AnalyticRep(f_coeffs)

    # m == 1: match Re(zeta*g) = psi coefficient-wise for the zero-mean part
    a = _fourier_coeffs(psi)
    mean = a[0].real
    b = np.zeros(k, dtype=complex)
    b[: k - 1] = 2.0 * a[1:k]
    f_coeffs = series_product(q, b, k)
    if abs(mean) <= 1e-14 * max(1.0, float(np.max(np.abs(psi)))):
        # numerically compatible data: keep the solution corrector-free
        return AnalyticRep(f_coeffs)
    gamma_g = -2.0 * mean * np.conj(zeta0)  # Re(zeta * gamma_g/(1-conj(zeta0)z)) = mean
    # multiply the pole by e^{-ip}: split off the value at zeta0, the rest is
    # the analytic divided difference -zeta0 * (q(z) - q(zeta0)) / (z - zeta0)
    q_at = complex(np.polynomial.polynomial.polyval(zeta0, q))
    d = divided_difference_series(q, zeta0, k)
    f_coeffs = f_coeffs - gamma_g * zeta0 * d
    return AnalyticRep(f_coeffs, poles=(PoleTerm(zeta0, gamma_g * q_at, 1),))


@dataclass(frozen=True)
class ResidualReport:
    """Boundary-residual summary over unmasked, non-corrector samples."""

    max_abs: float
    mean_abs: float
    n_probes: int
    n_excluded: int
    radius: float

    def to_json_dict(self):
        return {
            "max_abs_deviation": self.max_abs,
            "mean_abs_deviation": self.mean_abs,
            "n_probes": self.n_probes,
            "n_excluded": self.n_excluded,
            "probe_radius": self.radius,
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def boundary_residual(f, nu, phi, kappa=0.5, depth=13, exclusion_radius=0.1):
    """Estimate ``lim Re(nu f)`` along Stolz rays against ``phi``.

    Evaluates at radii ``1 - 2^{-k}`` for ``k = depth-2 .. depth`` and
    Richardson-extrapolates through second order; masked samples and samples
    within ``exclusion_radius`` of any corrector anchor are excluded.
    """
    check_aperture(kappa)
    if not isinstance(nu, DirectionField):
        nu = DirectionField(nu=np.asarray(nu, dtype=complex))
    if not isinstance(phi, BoundaryData):
        phi = BoundaryData(phi=np.asarray(phi, dtype=float))
    t = phi.t
    zeta = np.exp(1j * t)
    keep = ~phi.mask
    for z0 in f.singular_points():
        keep &= np.abs(zeta - z0) > exclusion_radius
    e = [
        np.real(nu.nu * f((1.0 - 2.0**-k) * zeta))
        for k in (depth - 2, depth - 1, depth)
    ]
    # three-level Richardson: kills both O(delta) and O(delta^2)
    est = e[0] / 3.0 - 2.0 * e[1] + (8.0 / 3.0) * e[2]
    dev = np.abs(est - phi.phi)[keep]
    return ResidualReport(
        max_abs=float(np.max(dev)) if dev.size else 0.0,
        mean_abs=float(np.mean(dev)) if dev.size else 0.0,
        n_probes=int(keep.sum()),
        n_excluded=int((~keep).sum()),
        radius=1.0 - 2.0**-depth,
    )
