"""Weighted BW barycenter via two independent routes: SDP and fixed-point iteration.

The two algorithms share no code path (one runs on the conic solver, the
other on pure eigendecompositions), so their agreement on the same instance
is a strong correctness check; :func:`compare_routes` packages exactly that.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import bw_core
from .bw_programs import _require_optimal, add_coupling_block
from .errors import DimensionMismatch
from .matrix_core import (
    SymmetricMatrix,
    _exact_sym,
    as_pd,
    clamp_psd,
    inv_sqrt_pd,
    sqrt_psd,
    trace,
)
from .sdp_model import (
    SolverSettings,
    constant_expr,
    new_problem,
    solve,
    trace_of,
    trace_product,
)

Array = np.ndarray


@dataclass(frozen=True)
class BarycenterProblem:
    """Positive weights and PD matrices; optional convex constraints on the result.

    Constraints apply to the SDP route only; the fixed-point route handles the
    unconstrained barycenter.
    """

    weights: tuple
    matrices: tuple
    constraints: object = None  # ConvexSetSpec or None

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        matrices = tuple(as_pd(a) for a in self.matrices)
        if len(weights) != len(matrices) or not matrices:
            raise ValueError("need equally many weights and matrices, at least one")
        if any(w <= 0.0 for w in weights):
            raise ValueError("weights must be positive")
        dims = {a.n for a in matrices}
        if len(dims) != 1:
            raise DimensionMismatch(f"matrices have mixed dimensions: {sorted(dims)}")
        if self.constraints is not None and self.constraints.dimension != matrices[0].n:
            raise DimensionMismatch("constraint set dimension mismatch")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "matrices", matrices)

    @property
    def dimension(self) -> int:
        return self.matrices[0].n

    def normalized_weights(self) -> Array:
        w = np.asarray(self.weights)
        return w / w.sum()


@dataclass(frozen=True)
class BarycenterResult:
    """Barycenter estimate with its closed-form objective.

    ``objective`` is always recomputed as ``sum_i w_i bw_distance^2(A_i, X)``
    with the problem's original weights, independent of the route that
    produced X.  ``residual`` is the final fixed-point step size or the
    solver's scaled duality gap.
    """

    X: SymmetricMatrix
    objective: float
    route: str
    iterations: int
    residual: float
    converged: bool = True


def closed_form_objective(problem: BarycenterProblem, X) -> float:
    x = clamp_psd(X)
    return sum(
        w * bw_core.bw_distance_squared(a, x).distance_squared
        for w, a in zip(problem.weights, problem.matrices)
    )


def solve_barycenter_sdp(problem: BarycenterProblem,
                         settings: SolverSettings | None = None) -> BarycenterResult:
    """Barycenter through one SDP with a coupling block per input matrix."""
    n = problem.dimension
    # The argmin is invariant under weight scaling; normalizing makes that
    # exact in floating point and keeps the objective scale uniform.
    weights = problem.normalized_weights()
    sdp = new_problem()
    X = sdp.add_symmetric_variable(n, "X")
    # X >= 0 is implied by every coupling block.
    objective = constant_expr(
        sum(w * trace(a) for w, a in zip(weights, problem.matrices))
    )
    objective = objective + float(weights.sum()) * trace_of(X)
    for idx, (w, a) in enumerate(zip(weights, problem.matrices)):
        coupling = add_coupling_block(sdp, X, name=f"K{idx + 1}")
        objective = objective - 2.0 * w * trace_product(sqrt_psd(a), coupling)
    sdp.set_objective(objective)
    if problem.constraints is not None:
        problem.constraints.add_to_problem(sdp, X)

    solution = solve(sdp, settings)
    _require_optimal(solution, "barycenter SDP")
    x_star = SymmetricMatrix(solution.value(X))
    return BarycenterResult(
        X=x_star,
        objective=closed_form_objective(problem, x_star),
        route="sdp",
        iterations=0,
        residual=solution.residuals.gap,
    )


def fixed_point_barycenter(problem: BarycenterProblem, X0=None,
                           tol: float = 1e-10, max_iter: int = 500,
                           ) -> BarycenterResult:
    """Classical fixed-point iteration for the unconstrained barycenter.

    Weights are normalized to sum to one internally (the iteration map is
    degree-2 homogeneous in the weights).  Default start is the weighted
    arithmetic mean of the inputs.  Hitting ``max_iter`` returns the last
    iterate with ``converged=False``.
    """
    if problem.constraints is not None:
        raise ValueError("fixed-point route handles the unconstrained barycenter only")
    weights = problem.normalized_weights()
    mats = [a.entries for a in problem.matrices]
    if X0 is None:
        current = sum(w * a for w, a in zip(weights, mats))
    else:
        current = as_pd(X0).entries
    current = _exact_sym(np.asarray(current, dtype=float))

    iterations = 0
    step = np.inf
    converged = False
    for iterations in range(1, max_iter + 1):
        pd = as_pd(current)  # NotPdError here means the iterate degenerated
        root = sqrt_psd(pd).entries
        inv_root = inv_sqrt_pd(pd).entries
        mean_root = np.zeros_like(current)
        for w, a in zip(weights, mats):
            mean_root += w * sqrt_psd(_exact_sym(root @ a @ root)).entries
        nxt = _exact_sym(inv_root @ (mean_root @ mean_root) @ inv_root)
        step = float(np.linalg.norm(nxt - current, ord="fro"))
        bound = tol * (1.0 + float(np.linalg.norm(current, ord="fro")))
        current = nxt
        if step <= bound:
            converged = True
            break

    x_star = SymmetricMatrix(current)
    return BarycenterResult(
        X=x_star,
        objective=closed_form_objective(problem, x_star),
        route="fixed_point",
        iterations=iterations,
        residual=step,
        converged=converged,
    )


@dataclass(frozen=True)
class RouteComparison:
    """Both routes' results with their mutual deviations and runtimes."""

    sdp: BarycenterResult
    fixed_point: BarycenterResult
    max_entry_deviation: float
    objective_deviation: float
    runtime_sdp: float
    runtime_fixed_point: float


def compare_routes(problem: BarycenterProblem,
                   settings: SolverSettings | None = None) -> RouteComparison:
    """Run both routes on an unconstrained problem and report their agreement."""
    if problem.constraints is not None:
        raise ValueError("route comparison requires an unconstrained problem")
    t0 = time.perf_counter()
    via_sdp = solve_barycenter_sdp(problem, settings)
    t1 = time.perf_counter()
    via_fp = fixed_point_barycenter(problem)
    t2 = time.perf_counter()
    deviation = float(np.abs(via_sdp.X.entries - via_fp.X.entries).max())
    return RouteComparison(
        sdp=via_sdp,
        fixed_point=via_fp,
        max_entry_deviation=deviation,
        objective_deviation=abs(via_sdp.objective - via_fp.objective),
        runtime_sdp=t1 - t0,
        runtime_fixed_point=t2 - t1,
    )
