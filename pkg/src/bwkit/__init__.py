"""Bures-Wasserstein toolkit: closed-form metric, SDP routes, sets, barycenters."""

from .barycenter import (
    BarycenterProblem,
    BarycenterResult,
    RouteComparison,
    compare_routes,
    fixed_point_barycenter,
    solve_barycenter_sdp,
)
from .bw_core import BwDistanceResult, bw_distance, bw_distance_squared, fidelity_term
from .bw_programs import (
    BwBall,
    DistanceSdpResult,
    ObjectiveSpec,
    build_distance_sdp,
    bw_ball_constraints,
    solve_ball_constrained,
    solve_distance,
)
from .errors import (
    AsymmetryError,
    BwkitError,
    ClampWarning,
    ConvergenceError,
    DimensionMismatch,
    InfeasibleSet,
    NotPdError,
    NotPsdError,
    SolverFailure,
    UnboundedSubproblem,
    UnknownVariable,
)
from .matrix_core import (
    EigenDecomposition,
    PdMatrix,
    SymmetricMatrix,
    as_pd,
    as_symmetric,
    clamp_psd,
    eig_sym,
    frobenius_norm,
    inv_sqrt_pd,
    is_pd,
    sqrt_psd,
    symmetrize,
    trace,
)
from .sdp_model import (
    AffineMatrixExpr,
    SdpProblem,
    SdpSolution,
    SdpVariable,
    SolutionStatus,
    SolverSettings,
    new_problem,
    solve,
)
from .set_geometry import (
    ConvexSetSpec,
    SetDistanceResult,
    default_init,
    membership,
    project_half_step,
    set_distance,
)

__version__ = "0.1.0"
