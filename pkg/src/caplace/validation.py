"""Input validation helpers shared by the solver APIs."""

import numpy as np

from .errors import ConfigurationError, DomainError


def check_power_of_two(n, minimum=16, name="n"):
    """Require an integer power of two >= ``minimum``; return it as int."""
    n = int(n)
    if n < minimum or (n & (n - 1)) != 0:
        raise ConfigurationError(
            f"{name} must be a power of two >= {minimum}, got {n}"
        )
    return n


def check_aperture(kappa):
    if not (0.0 < kappa < 1.0):
        raise ConfigurationError(f"aperture must lie in (0, 1), got {kappa}")
    return float(kappa)


def check_unimodular(zeta, tol=1e-12, name="zeta0"):
    """Require |zeta| = 1 within ``tol``; return the point snapped to the circle."""
    zeta = complex(zeta)
    r = abs(zeta)
    if abs(r - 1.0) > tol:
        raise DomainError(f"{name} must lie on the unit circle, |{name}| = {r}")
    return zeta / r


def as_complex_points(X):
    """Accept complex array-likes or (m, 2) real arrays; return 1-d complex."""
    X = np.asarray(X)
    if X.ndim == 2 and X.shape[1] == 2 and not np.iscomplexobj(X):
        return X[:, 0] + 1j * X[:, 1]
    return np.atleast_1d(X).astype(complex).ravel()


def boundary_samples(phi, n):
    """Coerce boundary data to ``n`` samples on the uniform parameter grid.

    ``phi`` may be a callable of the curve parameter, a scalar, or an array
    of length ``n``.
    """
    t = 2.0 * np.pi * np.arange(n) / n
    if callable(phi):
        return np.asarray([float(phi(tj)) for tj in t])
    phi = np.asarray(phi, dtype=float)
    if phi.ndim == 0:
        return np.full(n, float(phi))
    if phi.shape != (n,):
        raise ConfigurationError(
            f"boundary samples must have length {n}, got shape {phi.shape}"
        )
    return phi
