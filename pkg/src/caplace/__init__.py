"""caplace: nonclassical Neumann and directional-derivative solvers.

Constructive solutions of ``du/dnu -> phi`` for harmonic and A-harmonic
functions on the unit disk and star-like Jordan domains, with boundary
data free of the classical compatibility condition: the defect is absorbed
by closed-form correctors whose boundary violation is confined to single
points (sets of logarithmic capacity zero).
"""

from .analytic import AnalyticRep, LogTerm, PoleTerm, integrate_analytic
from .beltrami import (
    A_from_mu,
    BeltramiField,
    K_mu,
    MatrixFieldA,
    QCMap,
    directional_derivative_h,
    extend_mu,
    mu_from_A,
    solve_beltrami,
)
from .conformal import (
    ConformalMap,
    JordanSolution,
    boundary_limits,
    limacon_map,
    riemann_map,
    solve_directional_jordan,
    solve_neumann_jordan,
    transport_data,
)
from .errors import (
    CaplaceError,
    ConfigurationError,
    ConvergenceError,
    DataTooWildError,
    DegeneracyError,
    DomainError,
    GeometryError,
    IncompatibleDataError,
    InternalConsistencyError,
    RegularityError,
    UnsupportedDomainError,
    UnsupportedIndexError,
    ValidationError,
)
from .estimators import (
    BeltramiMapper,
    DirectionalAHarmonicSolver,
    DirectionalDiskSolver,
    DirectionalJordanSolver,
    NeumannAHarmonicSolver,
    NeumannDiskSolver,
    NeumannJordanSolver,
)
from .family import SolutionFamily, generate_family, independence_certificate
from .aharmonic import (
    AHarmonicSolution,
    aharmonic_residual,
    neumann_boundary_report,
    solve_directional_aharmonic,
    solve_neumann_aharmonic,
    transport_fields,
)
from .geometry import (
    BoundaryData,
    DirectionField,
    JordanCurve,
    StolzApproach,
    curve_from_samples,
    limacon_curve,
    normal_field,
    stolz_points,
    unit_circle,
)
from .harmonic import (
    HarmonicSolution,
    nontangential_derivative_trace,
    normal_derivative_pointwise,
    radial_limit,
    solve_directional_disk,
    solve_neumann_disk,
)
from .oracle import FDGrid, fd_solve_neumann, fourier_neumann_disk, laplacian_residual
from .riemann_hilbert import (
    ResidualReport,
    boundary_residual,
    conjugate_operator,
    corrector,
    schwarz_operator,
    solve_rh,
)

__version__ = "0.1.0"
