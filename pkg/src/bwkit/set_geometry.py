"""Convex sets of PSD matrices and set-to-set BW distance by alternating minimization.

Each half-step solves the distance SDP with the matrix variable free inside
the target set; the block's tightness makes the half-step an exact BW
projection, so the objective history is non-increasing and converges to the
distance between the sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bw_core
from .bw_programs import (
    _require_optimal,
    add_coupling_block,
    add_frobenius_norm_block,
)
from .errors import DimensionMismatch, InfeasibleSet
from .matrix_core import (
    SymmetricMatrix,
    as_symmetric,
    asmat,
    clamp_psd,
    sqrt_psd,
    trace,
)
from .sdp_model import (
    AffineMatrixExpr,
    SdpProblem,
    SdpVariable,
    SolutionStatus,
    SolverSettings,
    new_problem,
    solve,
    trace_of,
    trace_product,
)

Array = np.ndarray


def _coerce_affine(rows):
    return tuple((as_symmetric(mat), float(rhs)) for mat, rhs in rows)


@dataclass(frozen=True)
class ConvexSetSpec:
    """Declarative convex subset of PSD matrices.

    The implicit constraint ``X >= 0`` always applies; on top of it the spec
    may fix the trace, impose ``Tr(C_j X) = c_j`` / ``<= c_j`` rows, and bound
    ``||X - center||_F`` by a radius.
    """

    dimension: int
    trace_eq: float | None = None
    linear_eqs: tuple = ()
    linear_ineqs: tuple = ()
    frobenius_ball: tuple | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise DimensionMismatch("set dimension must be at least 1")
        object.__setattr__(self, "linear_eqs", _coerce_affine(self.linear_eqs))
        object.__setattr__(self, "linear_ineqs", _coerce_affine(self.linear_ineqs))
        for mat, _ in self.linear_eqs + self.linear_ineqs:
            if mat.n != self.dimension:
                raise DimensionMismatch("affine constraint matrix dimension mismatch")
        if self.frobenius_ball is not None:
            center, radius = self.frobenius_ball
            center = as_symmetric(center)
            if center.n != self.dimension:
                raise DimensionMismatch("Frobenius ball center dimension mismatch")
            if not float(radius) > 0.0:
                raise ValueError("Frobenius ball radius must be positive")
            object.__setattr__(self, "frobenius_ball", (center, float(radius)))

    def add_to_problem(self, problem: SdpProblem, X: SdpVariable) -> None:
        """Emit this spec's constraints on the symmetric variable X."""
        if X.rows != self.dimension:
            raise DimensionMismatch("variable dimension does not match set spec")
        if self.trace_eq is not None:
            problem.add_linear_eq(trace_of(X), self.trace_eq)
        for mat, rhs in self.linear_eqs:
            problem.add_linear_eq(trace_product(mat, X), rhs)
        for mat, rhs in self.linear_ineqs:
            problem.add_linear_ineq(trace_product(mat, X), rhs)
        if self.frobenius_ball is not None:
            center, radius = self.frobenius_ball
            add_frobenius_norm_block(problem, X, center=center, bound_const=radius)


def constraint_violation(spec: ConvexSetSpec, X) -> float:
    """Largest violation of the spec's constraints by X (0 when inside)."""
    arr = asmat(X)
    if arr.shape[0] != spec.dimension:
        raise DimensionMismatch("matrix dimension does not match set spec")
    sym = (arr + arr.T) / 2.0
    worst = max(0.0, -float(np.linalg.eigvalsh(sym)[0]))
    if spec.trace_eq is not None:
        worst = max(worst, abs(float(np.trace(sym)) - spec.trace_eq))
    for mat, rhs in spec.linear_eqs:
        worst = max(worst, abs(float(np.sum(mat.entries * sym)) - rhs))
    for mat, rhs in spec.linear_ineqs:
        worst = max(worst, float(np.sum(mat.entries * sym)) - rhs)
    if spec.frobenius_ball is not None:
        center, radius = spec.frobenius_ball
        worst = max(worst,
                    float(np.linalg.norm(sym - center.entries, ord="fro")) - radius)
    return worst


def membership(spec: ConvexSetSpec, X, tol: float = 1e-7) -> bool:
    """True iff ``X >= -tol*I`` and every affine constraint holds within ``tol``."""
    return constraint_violation(spec, X) <= tol


@dataclass(frozen=True)
class SetDistanceResult:
    """Converged distance with one witness per set and the per-half-step values."""

    distance_squared: float
    witness_a: SymmetricMatrix
    witness_b: SymmetricMatrix
    iterations: int
    objective_history: tuple
    converged: bool


def project_half_step(anchor, target: ConvexSetSpec,
                      settings: SolverSettings | None = None,
                      ) -> tuple[SymmetricMatrix, float]:
    """BW projection of ``anchor`` onto ``target``.

    Returns the minimizer and the squared distance
    ``Tr(anchor) + Tr(X*) - 2 Tr(sqrt(anchor) K*)``.
    """
    anchor_sym = clamp_psd(anchor)
    if anchor_sym.n != target.dimension:
        raise DimensionMismatch("anchor dimension does not match target set")
    root_anchor = sqrt_psd(anchor_sym)

    problem = new_problem()
    X = problem.add_symmetric_variable(target.dimension, "X")
    # X >= 0 is implied by the coupling block's Schur complement.
    coupling = add_coupling_block(problem, X, name="K")
    target.add_to_problem(problem, X)
    problem.set_objective(trace_of(X) - 2.0 * trace_product(root_anchor, coupling))

    solution = solve(problem, settings)
    _require_optimal(solution, "set projection half-step")
    value = trace(anchor_sym) + solution.objective_value
    return SymmetricMatrix(solution.value(X)), max(value, 0.0)


def default_init(spec: ConvexSetSpec,
                 settings: SolverSettings | None = None) -> SymmetricMatrix:
    """Deterministic feasible starting point.

    For a pure trace-equality set this is ``(c/n) I``; otherwise the point is
    found by minimizing the trace over the set.
    """
    pure_trace = (spec.trace_eq is not None and not spec.linear_eqs
                  and not spec.linear_ineqs and spec.frobenius_ball is None)
    if pure_trace:
        if spec.trace_eq < 0.0:
            raise InfeasibleSet("PSD matrices cannot have negative trace")
        return SymmetricMatrix(np.eye(spec.dimension) * (spec.trace_eq / spec.dimension))
    problem = new_problem()
    X = problem.add_symmetric_variable(spec.dimension, "X")
    problem.add_psd_block(AffineMatrixExpr(spec.dimension).place(X, 0, 0))
    spec.add_to_problem(problem, X)
    problem.set_objective(trace_of(X))
    solution = solve(problem, settings)
    if solution.status is SolutionStatus.INFEASIBLE:
        raise InfeasibleSet("set spec describes an empty set")
    _require_optimal(solution, "feasibility point")
    return clamp_psd(solution.value(X))


def set_distance(spec_a: ConvexSetSpec, spec_b: ConvexSetSpec, init=None,
                 tol: float = 1e-7, max_iter: int = 200,
                 settings: SolverSettings | None = None) -> SetDistanceResult:
    """Alternating minimization of the BW distance between two convex sets.

    Stops when consecutive half-step values agree to ``tol`` relative; hitting
    ``max_iter`` returns the best pair so far with ``converged=False``.
    """
    if spec_a.dimension != spec_b.dimension:
        raise DimensionMismatch("set specs have different dimensions")
    if init is None:
        init = default_init(spec_a, settings)
    witness_a = as_symmetric(init)
    if not membership(spec_a, witness_a, tol=1e-6):
        raise ValueError("init point is not inside the first set")
    witness_b = None

    history: list[float] = []
    anchor = witness_a
    anchor_in_a = True
    converged = False
    previous = None
    for _ in range(max_iter):
        target = spec_b if anchor_in_a else spec_a
        projected, value = project_half_step(anchor, target, settings)
        if anchor_in_a:
            witness_b = projected
        else:
            witness_a = projected
        history.append(value)
        if previous is not None and abs(value - previous) <= tol * (1.0 + abs(value)):
            converged = True
            break
        previous = value
        anchor = projected
        anchor_in_a = not anchor_in_a

    return SetDistanceResult(
        distance_squared=history[-1],
        witness_a=witness_a,
        witness_b=witness_b,
        iterations=len(history),
        objective_history=tuple(history),
        converged=converged,
    )


def cross_check(result: SetDistanceResult) -> float:
    """|reported distance^2 - closed form on the witnesses| (validation aid)."""
    closed = bw_core.bw_distance_squared(
        clamp_psd(result.witness_a), clamp_psd(result.witness_b)
    ).distance_squared
    return abs(result.distance_squared - closed)
