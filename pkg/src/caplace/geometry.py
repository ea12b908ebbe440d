"""Boundary curves, boundary data, direction fields and nontangential paths.

Curves are closed, positively oriented and stored as uniform parameter
samples ``z(t_j)``, ``t_j = 2*pi*j/N``, together with unit tangents and unit
interior normals (``n = i*tau`` for positive orientation: interior on the
left).  Boundary functions are sample vectors on the same parameter grid; a
finite exceptional mask marks parameters where the boundary condition is
exempt.  Finite point sets have logarithmic capacity zero, which is what
makes such masks an honest stand-in for capacity-zero exceptional sets.
"""

from dataclasses import dataclass, field

import numpy as np
from shapely.geometry import LinearRing

from .errors import ConfigurationError, GeometryError, ValidationError
from .validation import check_aperture, check_power_of_two, check_unimodular

_UNIT_TOL = 1e-12


def _csv_write(path, header, columns):
    data = np.column_stack(columns)
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")


def _csv_read(path, ncols):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != ncols:
        raise ConfigurationError(f"{path}: expected {ncols} columns, got {data.shape[1]}")
    return data


@dataclass(frozen=True)
class JordanCurve:
    """Sampled closed Jordan curve with tangents and interior normals.

    Attributes
    ----------
    t : (N,) float array
        Parameter samples in [0, 2*pi).
    z : (N,) complex array
        Curve points, positively oriented.
    tau : (N,) complex array
        Unit tangents.
    n : (N,) complex array
        Unit interior normals, ``n = i*tau``.
    lipschitz : bool
        Whether the curve is declared bilipschitz (true for all built-ins).
    """

    t: np.ndarray
    z: np.ndarray
    tau: np.ndarray
    n: np.ndarray
    lipschitz: bool = True

    def __post_init__(self):
        for name in ("t", "z", "tau", "n"):
            object.__setattr__(self, name, np.asarray(getattr(self, name)))
        if not (len(self.t) == len(self.z) == len(self.tau) == len(self.n)):
            raise GeometryError("curve sample arrays must have equal length")
        if np.max(np.abs(np.abs(self.tau) - 1.0)) > _UNIT_TOL:
            raise GeometryError("tangents must be unit vectors")
        if np.max(np.abs(np.abs(self.n) - 1.0)) > _UNIT_TOL:
            raise GeometryError("normals must be unit vectors")
        if np.max(np.abs(self.n - 1j * self.tau)) > _UNIT_TOL:
            raise GeometryError("interior normal must equal i*tau (positive orientation)")
        dz = np.abs(np.diff(self.z, append=self.z[:1]))
        if np.min(dz) == 0.0:
            raise GeometryError("curve samples must be pairwise distinct")
        ring = LinearRing(np.column_stack([self.z.real, self.z.imag]))
        if not ring.is_simple:
            raise GeometryError("sampled polyline self-intersects")

    @property
    def size(self):
        return len(self.t)

    def perimeter(self):
        """Chord-sum perimeter of the sampled polyline."""
        return float(np.sum(np.abs(np.diff(self.z, append=self.z[:1]))))

    def interior_point(self):
        """Centroid of the samples; interior for star-like curves."""
        return complex(np.mean(self.z))

    def to_csv(self, path):
        _csv_write(
            path,
            "t,re_z,im_z,re_n,im_n",
            [self.t, self.z.real, self.z.imag, self.n.real, self.n.imag],
        )

    @classmethod
    def from_csv(cls, path):
        data = _csv_read(path, 5)
        z = data[:, 1] + 1j * data[:, 2]
        n = data[:, 3] + 1j * data[:, 4]
        return cls(t=data[:, 0], z=z, tau=-1j * n, n=n)


def unit_circle(n):
    """Unit circle sampled at ``n`` (power of two) uniform parameters."""
    n = check_power_of_two(n)
    t = 2.0 * np.pi * np.arange(n) / n
    z = np.exp(1j * t)
    tau = 1j * z
    return JordanCurve(t=t, z=z, tau=tau, n=1j * tau)


def limacon_curve(n, a=0.3):
    """Limacon ``z(t) = e^{it} + a e^{2it}``; a smooth star-like Jordan curve
    for |a| < 1/2 whose Riemann map has the closed form inverse ``w + a w^2``."""
    n = check_power_of_two(n)
    if not abs(a) < 0.5:
        raise ConfigurationError(f"limacon parameter must satisfy |a| < 1/2, got {a}")
    t = 2.0 * np.pi * np.arange(n) / n
    z = np.exp(1j * t) + a * np.exp(2j * t)
    dz = 1j * np.exp(1j * t) + 2j * a * np.exp(2j * t)
    tau = dz / np.abs(dz)
    return JordanCurve(t=t, z=z, tau=tau, n=1j * tau)


def curve_from_samples(t, z, lipschitz=True):
    """Build a curve from point samples; tangents by spectral differentiation.

    Assumes the samples resolve a smooth closed curve (the FFT derivative is
    only accurate in that case).
    """
    z = np.asarray(z, dtype=complex)
    n = len(z)
    k = np.fft.fftfreq(n, d=1.0 / n)
    dz = np.fft.ifft(1j * k * np.fft.fft(z))
    a = np.abs(dz)
    if np.min(a) < 1e-12:
        raise GeometryError("degenerate tangent in sampled curve")
    tau = dz / a
    return JordanCurve(t=np.asarray(t, dtype=float), z=z, tau=tau, n=1j * tau,
                       lipschitz=lipschitz)


@dataclass(frozen=True)
class BoundaryData:
    """Real boundary samples with a finite exceptional mask.

    The mask marks parameter indices where the boundary condition is exempt;
    it must stay small (< N/8) so that the sampled data still determine the
    solution.  The values at masked indices are ignored by the solvers.
    """

    phi: np.ndarray
    mask: np.ndarray = None

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        object.__setattr__(self, "phi", phi)
        n = len(phi)
        check_power_of_two(n, name="sample count")
        if self.mask is None:
            mask = np.zeros(n, dtype=bool)
        else:
            mask = np.asarray(self.mask)
            if mask.dtype != bool:
                idx = np.asarray(mask, dtype=int)
                mask = np.zeros(n, dtype=bool)
                mask[idx] = True
        if mask.shape != (n,):
            raise ValidationError("mask length must match sample count")
        if int(mask.sum()) >= n // 8:
            raise ValidationError(
                f"exceptional mask too large: {int(mask.sum())} >= N/8 = {n // 8}"
            )
        object.__setattr__(self, "mask", mask)

    @property
    def size(self):
        return len(self.phi)

    @property
    def t(self):
        n = len(self.phi)
        return 2.0 * np.pi * np.arange(n) / n

    def mean(self):
        """Mean over unmasked samples."""
        keep = ~self.mask
        return float(np.mean(self.phi[keep]))

    def effective_samples(self):
        """Samples with masked entries replaced by neighbour interpolation.

        The solvers consume these, so wild values at exempt points cannot
        leak into the construction.
        """
        if not self.mask.any():
            return self.phi.copy()
        n = len(self.phi)
        t = self.t
        keep = ~self.mask
        tk = t[keep]
        vk = self.phi[keep]
        # periodic linear interpolation across the gaps (both seam sides)
        t_ext = np.concatenate([tk[-1:] - 2.0 * np.pi, tk, tk[:1] + 2.0 * np.pi])
        v_ext = np.concatenate([vk[-1:], vk, vk[:1]])
        out = self.phi.copy()
        out[self.mask] = np.interp(t[self.mask], t_ext, v_ext)
        return out

    @classmethod
    def from_function(cls, fn, n, mask=None):
        t = 2.0 * np.pi * np.arange(int(n)) / int(n)
        return cls(phi=np.array([float(fn(tj)) for tj in t]), mask=mask)

    @classmethod
    def constant(cls, c, n, mask=None):
        return cls(phi=np.full(int(n), float(c)), mask=mask)

    def to_csv(self, path):
        _csv_write(path, "t,phi,mask", [self.t, self.phi, self.mask.astype(float)])

    @classmethod
    def from_csv(cls, path):
        data = _csv_read(path, 3)
        return cls(phi=data[:, 1], mask=data[:, 2] > 0.5)


@dataclass(frozen=True)
class DirectionField:
    """Unit-complex direction samples with winding number and variation.

    ``winding`` is the degree of the field along the curve (argument
    tracking with unwrap threshold pi).  ``reduced_argument`` is the
    single-valued real ``s(t) = arg nu(t) - winding * t``; the factorization
    ``nu = zeta^winding * e^{i s}`` drives the Riemann-Hilbert reduction.
    """

    nu: np.ndarray
    winding: int = field(init=False)
    variation: float = field(init=False)
    reduced_argument: np.ndarray = field(init=False)

    def __post_init__(self):
        nu = np.asarray(self.nu, dtype=complex)
        object.__setattr__(self, "nu", nu)
        n = len(nu)
        check_power_of_two(n, name="sample count")
        if np.max(np.abs(np.abs(nu) - 1.0)) > _UNIT_TOL:
            raise ValidationError("direction samples must be unimodular within 1e-12")
        ang = np.unwrap(np.angle(nu))
        closing = float(np.angle(nu[0] * np.conj(nu[-1])))
        total = ang[-1] + closing - ang[0]
        m = int(np.rint(total / (2.0 * np.pi)))
        t = 2.0 * np.pi * np.arange(n) / n
        s = np.unwrap(np.angle(nu * np.exp(-1j * m * t)))
        if abs(s[-1] - s[0]) > np.pi:
            raise ValidationError("reduced argument is not single-valued")
        V = float(np.sum(np.abs(np.diff(nu, append=nu[:1]))))
        object.__setattr__(self, "winding", m)
        object.__setattr__(self, "variation", V)
        object.__setattr__(self, "reduced_argument", s)

    @property
    def size(self):
        return len(self.nu)

    @property
    def t(self):
        n = len(self.nu)
        return 2.0 * np.pi * np.arange(n) / n

    @classmethod
    def constant(cls, value, n):
        value = check_unimodular(value, name="direction")
        return cls(nu=np.full(int(n), value, dtype=complex))


def normal_field(curve):
    """Interior-normal direction field of a curve (a BV field; winding 1 for
    positively oriented convex curves, e.g. -zeta on the unit circle)."""
    if np.min(np.abs(curve.tau)) < 1e-12:
        raise GeometryError("degenerate tangent")
    return DirectionField(nu=curve.n)


@dataclass(frozen=True)
class StolzApproach:
    """Nontangential approach points in the cone at a boundary point.

    Every generated point satisfies ``|z - zeta| <= (1 + kappa) * (1 - |z|)``
    with ``|z| < 1``; radii are ``1 - 2^{-k}``.
    """

    zeta: complex
    kappa: float
    depths: np.ndarray
    offsets: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "zeta", check_unimodular(self.zeta, name="zeta"))
        object.__setattr__(self, "kappa", check_aperture(self.kappa))
        object.__setattr__(self, "depths", np.asarray(self.depths, dtype=int))

    def points(self):
        delta = 2.0 ** (-self.depths.astype(float))
        lateral = 0.7 * self.kappa
        pts = []
        for lam in self.offsets:
            w = self.zeta * (1.0 - delta + 1j * lam * lateral * delta)
            pts.append(w)
        pts = np.concatenate([np.atleast_1d(p) for p in pts])
        ok = (np.abs(pts) < 1.0) & (
            np.abs(pts - self.zeta) <= (1.0 + self.kappa) * (1.0 - np.abs(pts))
        )
        return pts[ok]


def stolz_points(zeta, kappa, m, offsets=(0.0,), start_depth=1):
    """``m`` cone points at ``zeta`` with radii ``1 - 2^{-k}``, deepest last.

    The zero offset is the radial ray; nonzero offsets in [-1, 1] sweep the
    cone laterally.  Points violating the cone inequality are never emitted.
    """
    depths = np.arange(start_depth, start_depth + int(m))
    return StolzApproach(zeta=zeta, kappa=kappa, depths=depths, offsets=tuple(offsets)).points()
