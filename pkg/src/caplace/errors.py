"""Exception hierarchy shared by all solver modules.

Exit-code mapping used by the CLI:

* 2 -- configuration and data-validation failures
* 3 -- convergence / internal-consistency failures
* 4 -- problems outside the supported class (index, domain shape)
"""


class CaplaceError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def __init__(self, message, stage=None, **details):
        super().__init__(message)
        self.stage = stage
        self.details = details

    def to_json_dict(self):
        d = {"error": type(self).__name__, "message": str(self)}
        if self.stage is not None:
            d["stage"] = self.stage
        if self.details:
            d["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return d


def _jsonable(v):
    try:
        import numpy as np

        if isinstance(v, np.ndarray):
            return v.tolist()
        if isinstance(v, (np.floating, np.integer)):
            return v.item()
        if isinstance(v, (np.complexfloating, complex)):
            return [v.real, v.imag]
    except Exception:
        pass
    return v


class ConfigurationError(CaplaceError):
    """Bad parameters: sample counts, apertures, radii, file selectors."""

    exit_code = 2


class ValidationError(CaplaceError):
    """Input data violate a documented invariant."""

    exit_code = 2


class GeometryError(ValidationError):
    """Degenerate curve geometry (zero tangent, self intersection)."""


class DomainError(ValidationError):
    """Point outside the domain of an operator (|zeta0| != 1, off-grid)."""


class DegeneracyError(ValidationError):
    """A Beltrami coefficient with |mu| >= 1 somewhere."""


class DataTooWildError(ValidationError):
    """Boundary data whose reduction exceeds the overflow guard."""


class IncompatibleDataError(ValidationError):
    """Classical compatibility condition violated (oracle-side refusal)."""


class ConvergenceError(CaplaceError):
    """An iteration failed to reach its tolerance."""

    exit_code = 3


class InternalConsistencyError(ConvergenceError):
    """A computed intermediate violates a structural assumption."""


class RegularityError(ConvergenceError):
    """A quasiconformal map lost regularity (vanishing directional derivative)."""


class UnsupportedIndexError(CaplaceError):
    """Direction-field winding outside the constructive range {0, 1}."""

    exit_code = 4


class UnsupportedDomainError(CaplaceError):
    """Domain outside the built-in mapper's star-like class."""

    exit_code = 4
