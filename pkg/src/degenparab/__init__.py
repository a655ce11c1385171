"""Verification laboratory for uniformly degenerate parabolic problems.

The operator under study is

    L u = rho^2 a_ij d_ij u + rho b_i d_i u + c u - d_t u,

uniformly parabolic in the interior of a bounded domain but degenerating
like the squared boundary distance rho^2 at the boundary.  The package
provides geometry and coefficient fields, closed-form solution families
built by a cancellation recursion, the forced boundary trace, a graded
theta-scheme solver with vanishing-viscosity limits, weighted Hölder norm
estimators, and certificate-style checks (barriers, comparison functions,
decay rates).
"""

from .geometry import (BoundaryPoint, DefiningFunction, Domain, DomainError,
                       boundary_distance, check_defining_function,
                       make_defining_function)
from .fields import (CoefficientSet, ConfigurationError, SmoothFunction,
                     apply_operator, char_poly_at, ellipticity_bounds,
                     gate_check, parse_expression)
from .manufactured import (ManufacturedSolution, ManufacturedSpec, SpecError,
                           build, residual_check)
from .boundary_trace import (BoundaryTrace, QuadratureError, boundary_limit,
                             compatibility_residual, ladder_coefficients,
                             trace_h, trace_u1)
from .solver import (DeltaSchedule, GateError, GridSpec, NumericError,
                     SpaceTimeField, graded_nodes, long_time_run, solve_ibvp,
                     solve_elliptic_limit, vanishing_viscosity)
from .holder_norms import (ConvergenceTrace, HolderReport, assembly_check,
                           fit_boundary_exponent, holder_norm, holder_seminorm,
                           parabolic_distance, slice_norm, weighted_norm,
                           windowed_convergence)
from .verify import (BarrierCertificate, check_linfty_bound,
                     check_max_principle, decay_certificate, find_barrier,
                     long_time_report)

__version__ = "0.1.0"
