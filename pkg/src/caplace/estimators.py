"""Scikit-learn style estimators wrapping the boundary-value solvers.

Each solver follows the fit/predict convention: ``fit`` consumes boundary
data (array over the uniform parameter grid, callable of the parameter, or
a scalar), ``predict`` evaluates the solution at interior points (complex
1-d or real (m, 2) arrays), ``gradient`` returns the gradient as an (m, 2)
real array.  Constructor arguments are plain parameters so ``get_params``,
``set_params``, cloning and pipeline composition work as usual.

>>> est = NeumannDiskSolver(n=256).fit(np.cos)
>>> est.predict([0.5 + 0.0j])
array([-0.5])
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .aharmonic import solve_directional_aharmonic
from .beltrami import BeltramiField, MatrixFieldA, solve_beltrami
from .conformal import solve_directional_jordan
from .errors import ConfigurationError
from .geometry import BoundaryData, DirectionField, normal_field, unit_circle
from .harmonic import solve_directional_disk, solve_neumann_disk
from .validation import as_complex_points, boundary_samples, check_unimodular


def _direction_field(nu, curve):
    if isinstance(nu, DirectionField):
        return nu
    if isinstance(nu, str):
        if nu == "normal":
            return normal_field(curve)
        raise ConfigurationError(f"unknown direction selector {nu!r}")
    if callable(nu):
        vals = np.asarray([complex(nu(t)) for t in curve.t])
        return DirectionField(nu=vals)
    if np.isscalar(nu):
        return DirectionField.constant(nu, curve.size)
    return DirectionField(nu=np.asarray(nu, dtype=complex))


class _SolverBase(BaseEstimator):
    """Shared predict/gradient plumbing over a fitted solution."""

    def _check_fitted(self):
        if getattr(self, "solution_", None) is None:
            raise NotFittedError(
                f"{type(self).__name__} must be fitted before prediction"
            )

    def predict(self, X):
        """Solution values at interior points."""
        self._check_fitted()
        z = as_complex_points(X)
        return np.asarray(self.solution_.u(z), dtype=float)

    def gradient(self, X):
        """Gradient (u_x, u_y) at interior points as an (m, 2) array."""
        self._check_fitted()
        z = as_complex_points(X)
        g = np.asarray(self.solution_.grad(z))
        return np.column_stack([g.real, g.imag])

    def score(self, X=None, y=None):
        """Negative boundary-residual max (larger is better), so model
        selection utilities can rank solver configurations."""
        self._check_fitted()
        return -float(self.residual_report_.max_abs)


class DirectionalDiskSolver(_SolverBase):
    """Directional-derivative problem on the unit disk.

    Parameters
    ----------
    nu : "normal", scalar, array, callable or DirectionField
        Unimodular direction field along the boundary (winding 0 or 1).
    n : int
        Boundary sample count (power of two).
    zeta0 : complex
        Corrector anchor on the unit circle.

    Attributes
    ----------
    solution_ : HarmonicSolution
    residual_report_ : ResidualReport
    """

    def __init__(self, nu="normal", n=1024, zeta0=1.0 + 0.0j):
        self.nu = nu
        self.n = n
        self.zeta0 = zeta0

    def fit(self, X, y=None):
        """Fit from boundary data ``X`` (samples, callable or scalar)."""
        curve = unit_circle(self.n)
        nu = _direction_field(self.nu, curve)
        phi = BoundaryData(phi=boundary_samples(X, self.n))
        self.solution_ = solve_directional_disk(nu, phi, check_unimodular(self.zeta0))
        self.residual_report_ = self.solution_.residual_report()
        return self


class NeumannDiskSolver(DirectionalDiskSolver):
    """Neumann problem on the unit disk (direction = interior normal).

    Accepts boundary data violating the classical compatibility condition;
    the defect is absorbed at ``zeta0``.
    """

    def __init__(self, n=1024, zeta0=1.0 + 0.0j):
        super().__init__(nu="normal", n=n, zeta0=zeta0)

    def fit(self, X, y=None):
        phi = BoundaryData(phi=boundary_samples(X, self.n))
        self.solution_ = solve_neumann_disk(phi, check_unimodular(self.zeta0))
        self.residual_report_ = self.solution_.residual_report()
        return self


class DirectionalJordanSolver(_SolverBase):
    """Directional-derivative problem on a star-like Jordan domain.

    Parameters
    ----------
    curve : JordanCurve
        Boundary curve (sampled, positively oriented).
    nu : direction-field specifier (see DirectionalDiskSolver).
    t0 : float
        Curve parameter carrying the corrector.
    """

    def __init__(self, curve=None, nu="normal", t0=0.0):
        self.curve = curve
        self.nu = nu
        self.t0 = t0

    def _curve(self):
        if self.curve is None:
            raise ConfigurationError("a JordanCurve is required")
        return self.curve

    def fit(self, X, y=None):
        curve = self._curve()
        nu = _direction_field(self.nu, curve)
        phi = BoundaryData(phi=boundary_samples(X, curve.size))
        self.solution_ = solve_directional_jordan(curve, nu, phi, t0=self.t0)
        self.residual_report_ = self.solution_.residual_report()
        return self


class NeumannJordanSolver(DirectionalJordanSolver):
    """Neumann problem on a star-like Jordan domain."""

    def __init__(self, curve=None, t0=0.0):
        super().__init__(curve=curve, nu="normal", t0=t0)


class DirectionalAHarmonicSolver(_SolverBase):
    """Directional-derivative problem for class-B A-harmonic functions.

    Parameters
    ----------
    a_field : MatrixFieldA
        Class-B coefficient field sampled on a square grid covering the
        curve with margin.
    curve : JordanCurve, default unit circle at 1024 samples.
    nu : direction-field specifier.
    t0 : float
        Corrector parameter.
    """

    def __init__(self, a_field=None, curve=None, nu="normal", t0=0.0):
        self.a_field = a_field
        self.curve = curve
        self.nu = nu
        self.t0 = t0

    def fit(self, X, y=None):
        curve = self.curve if self.curve is not None else unit_circle(1024)
        a_field = self.a_field if self.a_field is not None else MatrixFieldA.identity()
        nu = _direction_field(self.nu, curve)
        phi = BoundaryData(phi=boundary_samples(X, curve.size))
        self.solution_ = solve_directional_aharmonic(a_field, curve, nu, phi, t0=self.t0)
        self.residual_report_ = self.solution_.residual_report()
        return self


class NeumannAHarmonicSolver(DirectionalAHarmonicSolver):
    """Neumann problem for class-B A-harmonic functions."""

    def __init__(self, a_field=None, curve=None, t0=0.0):
        super().__init__(a_field=a_field, curve=curve, nu="normal", t0=t0)


class BeltramiMapper(_SolverBase):
    """Quasiconformal map estimator: fit a dilatation, transform points.

    ``fit`` accepts a BeltramiField, a callable ``mu(z)`` (treated as given
    on the unit disk and extended with compact support), or a complex
    constant.  ``transform`` maps points forward, ``inverse_transform``
    back.

    Parameters
    ----------
    grid_n : int
        Grid resolution per side.
    box : float
        Computational square is ``[-box, box]^2``.
    cutoff : float
        Support radius of the extended dilatation.
    """

    def __init__(self, grid_n=512, box=2.0, cutoff=1.5):
        self.grid_n = grid_n
        self.box = box
        self.cutoff = cutoff

    def fit(self, X, y=None):
        from .beltrami import extend_mu

        if isinstance(X, BeltramiField):
            field = X
        else:
            if np.isscalar(X) and not callable(X):
                c = complex(X)
                X = lambda z: c + 0.0 * np.asarray(z)
            field = extend_mu(X, R=self.cutoff, L=self.box, n=self.grid_n)
        self.map_ = solve_beltrami(field)
        return self

    def _check_fitted(self):
        if getattr(self, "map_", None) is None:
            raise NotFittedError("BeltramiMapper must be fitted first")

    def predict(self, X):
        return self.transform(X)

    def transform(self, X):
        self._check_fitted()
        return np.asarray(self.map_(as_complex_points(X)))

    def inverse_transform(self, X):
        self._check_fitted()
        return np.asarray(self.map_.inverse(as_complex_points(X)))

    def score(self, X=None, y=None):
        self._check_fitted()
        return -float(self.map_.residual_sup)
