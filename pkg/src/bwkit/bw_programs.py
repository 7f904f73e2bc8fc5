"""SDP formulations of the Bures-Wasserstein metric and BW-ball constraints.

The squared distance between PD matrices A and B is the optimum of

    min  Tr(A) + Tr(B) - 2 Tr(sqrt(A) K)
    s.t. [[B, K^T], [K, I]] >= 0,

a linear SDP whose relaxation is tight: the optimal coupling K satisfies
K^T K = B exactly, which is what ``tightness_residual`` measures.  The same
Schur-complement block turns ``{X : bw_distance(A, X)^2 <= d^2}`` into one PSD
block plus one linear inequality, usable inside any convex program over X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import bw_core
from .errors import (
    DimensionMismatch,
    InfeasibleSet,
    SolverFailure,
    UnboundedSubproblem,
)
from .matrix_core import (
    PdMatrix,
    SymmetricMatrix,
    as_pd,
    as_symmetric,
    sqrt_psd,
    trace,
)
from .sdp_model import (
    AffineMatrixExpr,
    SdpProblem,
    SdpVariable,
    SolutionStatus,
    SolverSettings,
    constant_expr,
    new_problem,
    scalar_value,
    solve,
    trace_of,
    trace_product,
)

if TYPE_CHECKING:  # pragma: no cover
    from .set_geometry import ConvexSetSpec

Array = np.ndarray

#: Floor below which a returned squared distance signals a solver bug.
DISTANCE_SQUARED_FLOOR = -1e-6


@dataclass(frozen=True)
class DistanceSdpResult:
    """Optimal value and coupling of the distance SDP.

    ``tightness_residual`` is ``||K^T K - B||_F``; at an optimal status it
    stays below ``1e-4 * (1 + ||B||_F)``.
    """

    distance_squared: float
    coupling: Array
    tightness_residual: float


@dataclass(frozen=True)
class BwBall:
    """Ball ``{X : bw_distance(center, X)^2 <= radius_squared}``."""

    center: PdMatrix
    radius_squared: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_pd(self.center))
        if not self.radius_squared > 0.0:
            raise ValueError("radius_squared must be positive")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Objective over the matrix variable X: Frobenius norm, trace, or Tr(C X)."""

    kind: str  # 'frobenius_norm' | 'trace' | 'linear'
    coefficient: SymmetricMatrix | None = None

    @classmethod
    def frobenius(cls):
        return cls("frobenius_norm")

    @classmethod
    def trace(cls):
        return cls("trace")

    @classmethod
    def linear(cls, C):
        return cls("linear", as_symmetric(C))


def add_coupling_block(problem: SdpProblem, top_left, name: str = "K") -> SdpVariable:
    """Fresh n x n coupling K with block ``[[TL, K^T], [K, I]] >= 0`` added.

    ``top_left`` is either a symmetric matrix variable or a constant symmetric
    matrix.  The block constrains ``K^T K <= TL`` via the Schur complement.
    """
    if isinstance(top_left, SdpVariable):
        if top_left.kind != "symmetric":
            raise DimensionMismatch("coupling block needs a symmetric top-left")
        n = top_left.rows
    else:
        top_left = as_symmetric(top_left)
        n = top_left.n
    coupling = problem.add_rectangular_variable(n, n, name)
    block = AffineMatrixExpr(2 * n)
    if isinstance(top_left, SdpVariable):
        block.place(top_left, 0, 0)
    else:
        block.add_constant(top_left.entries, 0, 0)
    block.place(coupling, n, 0)
    block.add_constant(np.eye(n), n, n)
    problem.add_psd_block(block)
    return coupling


def add_frobenius_norm_block(problem: SdpProblem, X: SdpVariable, *,
                             center=None, bound_var: SdpVariable | None = None,
                             bound_const: float | None = None) -> None:
    """PSD epigraph block enforcing ``||X - center||_F <= bound``.

    The bound is either a scalar variable (norm-minimization epigraph) or a
    constant radius.  Uses the scaled half-vectorization of X, so the block
    has size ``1 + n(n+1)/2``.
    """
    if (bound_var is None) == (bound_const is None):
        raise ValueError("exactly one of bound_var / bound_const is required")
    if X.kind != "symmetric":
        raise DimensionMismatch("Frobenius block needs a symmetric variable")
    m = X.ndof
    block = AffineMatrixExpr(1 + m)
    root2 = math.sqrt(2.0)
    for k, (i, j) in enumerate(X.dof_pairs()):
        block.add_entry_term(X, k, 0, 1 + k, 1.0 if i == j else root2)
    if center is not None:
        c = as_symmetric(center)
        if c.n != X.rows:
            raise DimensionMismatch("center dimension does not match variable")
        svec = np.array([
            c.entries[i, j] * (1.0 if i == j else root2) for i, j in X.dof_pairs()
        ])
        shift = np.zeros((1 + m, 1 + m))
        shift[0, 1:] = -svec
        shift[1:, 0] = -svec
        block.add_constant(shift)
    if bound_var is not None:
        block.add_scalar_term(bound_var, np.eye(1 + m))
    else:
        if bound_const < 0.0:
            raise ValueError("Frobenius bound must be nonnegative")
        block.add_constant(bound_const * np.eye(1 + m))
    problem.add_psd_block(block)


def build_distance_sdp(A, B) -> SdpProblem:
    """Distance SDP between PD matrices; the coupling variable is named 'K'."""
    a = as_pd(A)
    b = as_pd(B)
    if a.n != b.n:
        raise DimensionMismatch(f"dimension mismatch: {a.n} vs {b.n}")
    problem = new_problem()
    coupling = add_coupling_block(problem, b.base, name="K")
    root_a = sqrt_psd(a)
    objective = (constant_expr(trace(a) + trace(b))
                 - 2.0 * trace_product(root_a, coupling))
    problem.set_objective(objective)
    return problem


def _require_optimal(solution, context: str):
    if solution.status is SolutionStatus.OPTIMAL:
        return
    if solution.status is SolutionStatus.INFEASIBLE:
        raise InfeasibleSet(f"{context}: problem infeasible ({solution.message})")
    if solution.status is SolutionStatus.UNBOUNDED:
        raise UnboundedSubproblem(f"{context}: objective unbounded ({solution.message})")
    raise SolverFailure(
        f"{context}: {solution.status.value} ({solution.message}); "
        f"residuals {solution.residuals}"
    )


def solve_distance(A, B, settings: SolverSettings | None = None) -> DistanceSdpResult:
    """Squared BW distance via the SDP route, with the tightness certificate."""
    b = as_pd(B)
    problem = build_distance_sdp(A, b)
    solution = solve(problem, settings)
    _require_optimal(solution, "distance SDP")
    coupling = solution.value(problem.variable("K"))
    value = solution.objective_value
    if value < DISTANCE_SQUARED_FLOOR:
        raise SolverFailure(
            f"distance SDP returned {value:.3e}, below the round-off floor"
        )
    residual = float(np.linalg.norm(coupling.T @ coupling - b.entries, ord="fro"))
    return DistanceSdpResult(max(value, 0.0), coupling, residual)


def bw_ball_constraints(problem: SdpProblem, ball: BwBall,
                        X: SdpVariable) -> SdpVariable:
    """Add one ball's PSD block and linear inequality; returns its fresh coupling."""
    if X.kind != "symmetric" or X.rows != ball.center.n:
        raise DimensionMismatch(
            f"ball center is {ball.center.n}x{ball.center.n}, "
            f"variable is {X.rows}x{X.cols}"
        )
    coupling = add_coupling_block(problem, X, name=f"K_ball{len(problem.linear_ineq)}")
    root_center = sqrt_psd(ball.center)
    lhs = trace_of(X) - 2.0 * trace_product(root_center, coupling)
    problem.add_linear_ineq(lhs, ball.radius_squared - trace(ball.center))
    return coupling


def solve_ball_constrained(objective: ObjectiveSpec, balls, base_set=None,
                           settings: SolverSettings | None = None,
                           ) -> tuple[SymmetricMatrix, float]:
    """Minimize the objective over PSD X subject to BW balls and an optional base set.

    Returns the optimizer and optimal value.  Raises :class:`InfeasibleSet`
    when the balls (and base set) are mutually exclusive.
    """
    balls = list(balls)
    dims = {ball.center.n for ball in balls}
    if base_set is not None:
        dims.add(base_set.dimension)
    if not dims:
        raise ValueError("at least one ball or a base set is required")
    if len(dims) != 1:
        raise DimensionMismatch(f"inconsistent dimensions: {sorted(dims)}")
    n = dims.pop()

    problem = new_problem()
    X = problem.add_symmetric_variable(n, "X")
    for ball in balls:
        bw_ball_constraints(problem, ball, X)
    if not balls:
        # No coupling block implies X >= 0; add it explicitly.
        problem.add_psd_block(AffineMatrixExpr(n).place(X, 0, 0))
    if base_set is not None:
        base_set.add_to_problem(problem, X)

    if objective.kind == "trace":
        problem.set_objective(trace_of(X))
    elif objective.kind == "linear":
        if objective.coefficient is None or objective.coefficient.n != n:
            raise DimensionMismatch("linear objective coefficient has wrong dimension")
        problem.set_objective(trace_product(objective.coefficient, X))
    elif objective.kind == "frobenius_norm":
        bound = problem.add_scalar_variable("t")
        add_frobenius_norm_block(problem, X, bound_var=bound)
        problem.set_objective(scalar_value(bound))
    else:
        raise ValueError(f"unsupported objective kind {objective.kind!r}")

    solution = solve(problem, settings)
    _require_optimal(solution, "ball-constrained program")
    return SymmetricMatrix(solution.value(X)), solution.objective_value


def ball_violations(X, balls) -> list[float]:
    """Closed-form ``bw_distance^2(center, X) - radius^2`` per ball (soundness check)."""
    from .matrix_core import clamp_psd

    x = clamp_psd(X)
    return [
        bw_core.bw_distance_squared(ball.center, x).distance_squared
        - ball.radius_squared
        for ball in balls
    ]
