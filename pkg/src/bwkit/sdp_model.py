"""Declarative semidefinite-program model with a pluggable solver backend.

A problem is built from matrix/scalar variables, a linear objective (min
sense), affine PSD block constraints, and linear equalities/inequalities.
The default backend translates the model into CVXOPT's ``conelp`` cone-LP
form and maps the result back; any object with a ``solve(problem, settings)``
method satisfying the same contract can be substituted.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, UnknownVariable
from .matrix_core import asmat, _exact_sym

Array = np.ndarray

_next_var_id = itertools.count(1)


@dataclass(frozen=True)
class SdpVariable:
    """Handle to a declared variable: symmetric matrix, rectangular matrix, or scalar."""

    id: int
    kind: str  # 'symmetric' | 'rectangular' | 'scalar'
    rows: int
    cols: int
    name: str = ""

    @property
    def ndof(self) -> int:
        if self.kind == "symmetric":
            return self.rows * (self.rows + 1) // 2
        return self.rows * self.cols

    def dof_pairs(self):
        """Index pairs backing each scalar degree of freedom, in dof order."""
        if self.kind == "symmetric":
            return [(i, j) for i in range(self.rows) for j in range(i, self.rows)]
        return [(i, j) for i in range(self.rows) for j in range(self.cols)]

    def unpack(self, dofs: Array):
        """Rebuild the variable's value from its flat dof vector."""
        if self.kind == "scalar":
            return float(dofs[0])
        out = np.zeros((self.rows, self.cols))
        for k, (i, j) in enumerate(self.dof_pairs()):
            out[i, j] = dofs[k]
            if self.kind == "symmetric" and i != j:
                out[j, i] = dofs[k]
        return out


class LinearExpr:
    """Linear functional of problem variables plus a constant."""

    __slots__ = ("coeffs", "constant")

    def __init__(self, coeffs=None, constant: float = 0.0):
        self.coeffs: dict[int, Array] = coeffs or {}
        self.constant = float(constant)

    def copy(self) -> "LinearExpr":
        return LinearExpr({k: v.copy() for k, v in self.coeffs.items()}, self.constant)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return LinearExpr({k: v.copy() for k, v in self.coeffs.items()},
                              self.constant + other)
        if not isinstance(other, LinearExpr):
            return NotImplemented
        out = self.copy()
        for k, v in other.coeffs.items():
            if k in out.coeffs:
                out.coeffs[k] = out.coeffs[k] + v
            else:
                out.coeffs[k] = v.copy()
        out.constant += other.constant
        return out

    __radd__ = __add__

    def __neg__(self):
        return LinearExpr({k: -v for k, v in self.coeffs.items()}, -self.constant)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return self + (-other)
        if not isinstance(other, LinearExpr):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scale):
        if not isinstance(scale, (int, float)):
            return NotImplemented
        return LinearExpr({k: v * scale for k, v in self.coeffs.items()},
                          self.constant * scale)

    __rmul__ = __mul__


def constant_expr(value: float) -> LinearExpr:
    return LinearExpr({}, value)


def scalar_value(var: SdpVariable) -> LinearExpr:
    """The value of a scalar variable as a linear expression."""
    if var.kind != "scalar":
        raise DimensionMismatch(f"variable {var.name!r} is not scalar")
    return LinearExpr({var.id: np.ones(1)})


def trace_of(var: SdpVariable) -> LinearExpr:
    """Trace of a square matrix variable."""
    if var.kind == "scalar":
        return scalar_value(var)
    if var.rows != var.cols:
        raise DimensionMismatch("trace requires a square variable")
    c = np.zeros(var.ndof)
    for k, (i, j) in enumerate(var.dof_pairs()):
        if i == j:
            c[k] = 1.0
    return LinearExpr({var.id: c})


def trace_product(C, var: SdpVariable) -> LinearExpr:
    """``Tr(C @ V)`` as a linear expression in the matrix variable V."""
    coeff = asmat(C)
    if var.kind == "scalar":
        raise DimensionMismatch("trace_product requires a matrix variable")
    if coeff.shape != (var.cols, var.rows):
        raise DimensionMismatch(
            f"coefficient shape {coeff.shape} does not match variable "
            f"({var.rows}x{var.cols})"
        )
    c = np.zeros(var.ndof)
    for k, (i, j) in enumerate(var.dof_pairs()):
        if var.kind == "symmetric":
            c[k] = coeff[i, i] if i == j else coeff[i, j] + coeff[j, i]
        else:
            c[k] = coeff[j, i]
    return LinearExpr({var.id: c})


class AffineMatrixExpr:
    """Symmetric matrix-valued expression, affine in problem variables.

    Holds a constant block plus, per variable, one coefficient matrix for each
    scalar degree of freedom.  All placement helpers mirror their contribution
    across the diagonal so the expression stays symmetric.
    """

    def __init__(self, size: int):
        if size < 1:
            raise DimensionMismatch("block size must be at least 1")
        self.size = size
        self.constant = np.zeros((size, size))
        self.coeffs: dict[int, Array] = {}
        self.vars: dict[int, SdpVariable] = {}

    def _coeff(self, var: SdpVariable) -> Array:
        if var.id not in self.coeffs:
            self.coeffs[var.id] = np.zeros((var.ndof, self.size, self.size))
            self.vars[var.id] = var
        return self.coeffs[var.id]

    def _check_bounds(self, row: int, col: int, height: int, width: int):
        if row < 0 or col < 0 or row + height > self.size or col + width > self.size:
            raise DimensionMismatch(
                f"a {height}x{width} placement at ({row},{col}) does not fit "
                f"in a {self.size}x{self.size} block"
            )

    def add_constant(self, M, row: int = 0, col: int = 0) -> "AffineMatrixExpr":
        """Add constant block M at (row, col), mirrored as M^T at (col, row)."""
        m = np.atleast_2d(np.asarray(M, dtype=float))
        h, w = m.shape
        self._check_bounds(row, col, h, w)
        if row != col:
            self._check_bounds(col, row, w, h)
        self.constant[row:row + h, col:col + w] += m
        if row != col:
            self.constant[col:col + w, row:row + h] += m.T
        elif not np.allclose(m, m.T):
            raise DimensionMismatch("diagonal constant block must be symmetric")
        return self

    def place(self, var: SdpVariable, row: int, col: int) -> "AffineMatrixExpr":
        """Place variable V at (row, col); off-diagonal placements mirror V^T at (col, row)."""
        h, w = var.rows, var.cols
        self._check_bounds(row, col, h, w)
        coeff = self._coeff(var)
        if row == col:
            if var.kind == "rectangular":
                raise ValueError(
                    "diagonal placement requires a symmetric or scalar variable"
                )
            for k, (i, j) in enumerate(var.dof_pairs()):
                coeff[k, row + i, col + j] += 1.0
                if i != j:
                    coeff[k, row + j, col + i] += 1.0
            return self
        self._check_bounds(col, row, w, h)
        for k, (i, j) in enumerate(var.dof_pairs()):
            positions = [(i, j)]
            if var.kind == "symmetric" and i != j:
                positions.append((j, i))
            for (ii, jj) in positions:
                coeff[k, row + ii, col + jj] += 1.0
                coeff[k, col + jj, row + ii] += 1.0
        return self

    def add_scalar_term(self, var: SdpVariable, M) -> "AffineMatrixExpr":
        """Add ``var * M`` for a scalar variable and symmetric coefficient M."""
        if var.kind != "scalar":
            raise DimensionMismatch("add_scalar_term requires a scalar variable")
        m = np.asarray(M, dtype=float)
        if m.shape != (self.size, self.size):
            raise DimensionMismatch(
                f"coefficient shape {m.shape} does not match block size {self.size}"
            )
        self._coeff(var)[0] += _exact_sym(m)
        return self

    def add_entry_term(self, var: SdpVariable, dof: int, row: int, col: int,
                       value: float) -> "AffineMatrixExpr":
        """Add ``value * var_dof`` at (row, col), mirrored at (col, row)."""
        self._check_bounds(row, col, 1, 1)
        coeff = self._coeff(var)
        coeff[dof, row, col] += value
        if row != col:
            coeff[dof, col, row] += value
        return self

    def evaluate(self, dof_values: dict[int, Array]) -> Array:
        """Numeric block for given flat dof vectors (diagnostics and residuals)."""
        out = self.constant.copy()
        for vid, coeff in self.coeffs.items():
            out += np.tensordot(dof_values[vid], coeff, axes=(0, 0))
        return out


class SolutionStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass
class SolverSettings:
    """Tolerances and limits handed to the backend."""

    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    max_iter: int = 200
    verbose: bool = False


@dataclass
class Residuals:
    """Scaled primal/dual feasibility violations and duality gap."""

    primal: float
    dual: float
    gap: float


@dataclass
class SdpSolution:
    status: SolutionStatus
    objective_value: float
    assignments: dict[int, object]
    residuals: Residuals
    message: str = ""

    def value(self, var: SdpVariable):
        return self.assignments[var.id]


class SdpProblem:
    """Conic program under construction: variables, min objective, constraints."""

    def __init__(self):
        self._vars: dict[int, SdpVariable] = {}
        self.objective: LinearExpr = constant_expr(0.0)
        self.psd_constraints: list[AffineMatrixExpr] = []
        self.linear_eq: list[tuple[LinearExpr, float]] = []
        self.linear_ineq: list[tuple[LinearExpr, float]] = []

    # -- variables ---------------------------------------------------------

    @property
    def variables(self) -> list[SdpVariable]:
        return list(self._vars.values())

    def _register(self, var: SdpVariable) -> SdpVariable:
        self._vars[var.id] = var
        return var

    def add_symmetric_variable(self, n: int, name: str = "") -> SdpVariable:
        if n < 1:
            raise DimensionMismatch("symmetric variable dimension must be >= 1")
        return self._register(SdpVariable(next(_next_var_id), "symmetric", n, n, name))

    def add_rectangular_variable(self, rows: int, cols: int, name: str = "") -> SdpVariable:
        if rows < 1 or cols < 1:
            raise DimensionMismatch("rectangular variable dimensions must be >= 1")
        return self._register(
            SdpVariable(next(_next_var_id), "rectangular", rows, cols, name)
        )

    def add_scalar_variable(self, name: str = "") -> SdpVariable:
        return self._register(SdpVariable(next(_next_var_id), "scalar", 1, 1, name))

    def variable(self, name: str) -> SdpVariable:
        for var in self._vars.values():
            if var.name == name:
                return var
        raise UnknownVariable(f"no variable named {name!r}")

    def _check_expr(self, expr):
        ids = expr.coeffs.keys()
        for vid in ids:
            if vid not in self._vars:
                raise UnknownVariable(
                    f"expression references variable id {vid} not declared here"
                )

    # -- constraints and objective ------------------------------------------

    def set_objective(self, expr: LinearExpr):
        """Objective to minimize."""
        self._check_expr(expr)
        self.objective = expr.copy()

    def add_psd_block(self, expr: AffineMatrixExpr):
        self._check_expr(expr)
        self.psd_constraints.append(expr)
        return expr

    def add_linear_eq(self, expr: LinearExpr, rhs: float):
        self._check_expr(expr)
        self.linear_eq.append((expr.copy(), float(rhs)))

    def add_linear_ineq(self, expr: LinearExpr, rhs: float, direction: str = "le"):
        """Affine inequality ``expr <= rhs`` (or >= with direction='ge')."""
        self._check_expr(expr)
        if direction == "le":
            self.linear_ineq.append((expr.copy(), float(rhs)))
        elif direction == "ge":
            self.linear_ineq.append(((-expr), -float(rhs)))
        else:
            raise ValueError(f"direction must be 'le' or 'ge', got {direction!r}")

    # -- introspection -------------------------------------------------------

    def dump(self) -> str:
        """Human-readable text dump of the problem, for bug reports."""
        buf = io.StringIO()
        print(f"SdpProblem: {len(self._vars)} variables, "
              f"{len(self.psd_constraints)} PSD blocks, "
              f"{len(self.linear_eq)} eq, {len(self.linear_ineq)} ineq", file=buf)
        for var in self._vars.values():
            print(f"  var {var.id} {var.name!r}: {var.kind} "
                  f"{var.rows}x{var.cols} ({var.ndof} dofs)", file=buf)
        print(f"  minimize: constant {self.objective.constant:+.6g}", file=buf)
        for vid, c in self.objective.coeffs.items():
            var = self._vars[vid]
            print(f"    + <c, {var.name or vid}> with |c| = {np.abs(c).sum():.6g}",
                  file=buf)
        for idx, block in enumerate(self.psd_constraints):
            names = [self._vars[v].name or str(v) for v in block.coeffs]
            print(f"  PSD block {idx}: {block.size}x{block.size}, "
                  f"variables {names}", file=buf)
        for expr, rhs in self.linear_eq:
            names = [self._vars[v].name or str(v) for v in expr.coeffs]
            print(f"  eq: <c, ({names})> = {rhs - expr.constant:.6g}", file=buf)
        for expr, rhs in self.linear_ineq:
            names = [self._vars[v].name or str(v) for v in expr.coeffs]
            print(f"  ineq: <c, ({names})> <= {rhs - expr.constant:.6g}", file=buf)
        return buf.getvalue()


def new_problem() -> SdpProblem:
    return SdpProblem()


# ---------------------------------------------------------------------------
# Default backend: CVXOPT conelp adapter
# ---------------------------------------------------------------------------


class CvxoptConelpBackend:
    """Dense interior-point backend via ``cvxopt.solvers.conelp``.

    The solver is driven at tolerances one decade tighter than requested so
    the recomputed residuals comfortably satisfy the settings; an 'unknown'
    CVXOPT exit is still accepted as optimal when the final iterate meets the
    requested tolerances.
    """

    def solve(self, problem: SdpProblem, settings: SolverSettings) -> SdpSolution:
        from cvxopt import matrix as cvx_matrix
        from cvxopt import solvers

        variables = problem.variables
        offsets: dict[int, int] = {}
        total = 0
        for var in variables:
            offsets[var.id] = total
            total += var.ndof
        if total == 0:
            raise UnknownVariable("problem has no variables")

        def densify(expr: LinearExpr) -> Array:
            row = np.zeros(total)
            for vid, c in expr.coeffs.items():
                off = offsets[vid]
                row[off:off + len(c)] = c
            return row

        c_vec = densify(problem.objective)
        obj_const = problem.objective.constant

        g_rows: list[Array] = []
        h_vals: list[float] = []
        for expr, rhs in problem.linear_ineq:
            g_rows.append(densify(expr))
            h_vals.append(rhs - expr.constant)
        n_l = len(g_rows)

        s_dims: list[int] = []
        g_blocks: list[Array] = []
        h_blocks: list[Array] = []
        for block in problem.psd_constraints:
            s = block.size
            s_dims.append(s)
            gb = np.zeros((s * s, total))
            for vid, coeff in block.coeffs.items():
                off = offsets[vid]
                for k in range(coeff.shape[0]):
                    gb[:, off + k] = -coeff[k].flatten(order="F")
            g_blocks.append(gb)
            h_blocks.append(block.constant.flatten(order="F"))

        g_parts = []
        h_parts = []
        if n_l:
            g_parts.append(np.vstack(g_rows))
            h_parts.append(np.asarray(h_vals))
        g_parts.extend(g_blocks)
        h_parts.extend(h_blocks)
        G = np.vstack(g_parts)
        h = np.concatenate(h_parts)

        A = None
        b = None
        if problem.linear_eq:
            A = np.vstack([densify(expr) for expr, _ in problem.linear_eq])
            b = np.asarray([rhs - expr.constant for expr, rhs in problem.linear_eq])
            reduced = self._reduce_equalities(A, b)
            if reduced is None:
                return SdpSolution(
                    SolutionStatus.INFEASIBLE, math.nan, {},
                    Residuals(math.inf, math.inf, math.inf),
                    message="equality constraints are inconsistent",
                )
            A, b = reduced
            if A.shape[0] == 0:
                A = b = None

        dims = {"l": n_l, "q": [], "s": s_dims}
        # Drive CVXOPT a decade tighter than requested, floored where its
        # iterative refinement starts dividing by zero on tiny problems.
        # Retry at looser internal tolerances when it still breaks down on
        # near-degenerate instances; requested tolerances are re-validated
        # on the returned iterate either way.
        sol = None
        failure = ""
        attempts = [(relax, kkt) for relax in (1.0, 10.0, 100.0)
                    for kkt in ("chol", "ldl")]
        for relax, kktsolver in attempts:
            options = {
                "show_progress": settings.verbose,
                "maxiters": settings.max_iter,
                "abstol": max(settings.gap_tol * relax / 10.0, 1e-10),
                "reltol": max(settings.gap_tol * relax / 10.0, 1e-10),
                "feastol": max(settings.feas_tol * relax / 10.0, 1e-10),
            }
            try:
                sol = solvers.conelp(
                    cvx_matrix(c_vec),
                    cvx_matrix(G),
                    cvx_matrix(h),
                    dims=dims,
                    A=cvx_matrix(A) if A is not None else None,
                    b=cvx_matrix(b) if b is not None else None,
                    options=options,
                    kktsolver=kktsolver,
                )
                break
            except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
                failure = f"conelp raised: {exc}"
                sol = None
        if sol is None:
            return SdpSolution(
                SolutionStatus.NUMERICAL_FAILURE, math.nan, {},
                Residuals(math.inf, math.inf, math.inf), message=failure,
            )

        status_map = {
            "optimal": SolutionStatus.OPTIMAL,
            "primal infeasible": SolutionStatus.INFEASIBLE,
            "dual infeasible": SolutionStatus.UNBOUNDED,
            "unknown": SolutionStatus.NUMERICAL_FAILURE,
        }
        status = status_map.get(sol["status"], SolutionStatus.NUMERICAL_FAILURE)

        if sol["x"] is None or status in (SolutionStatus.INFEASIBLE,
                                          SolutionStatus.UNBOUNDED):
            return SdpSolution(
                status, math.nan, {}, Residuals(math.inf, math.inf, math.inf),
                message=f"conelp status: {sol['status']}",
            )

        x = np.asarray(sol["x"]).ravel()
        dof_values = {
            var.id: x[offsets[var.id]:offsets[var.id] + var.ndof]
            for var in variables
        }
        assignments = {var.id: var.unpack(dof_values[var.id]) for var in variables}
        objective_value = float(c_vec @ x) + obj_const

        primal_res = self._primal_residual(problem, dof_values)
        gap = sol.get("gap")
        pobj = sol.get("primal objective")
        dobj = sol.get("dual objective")
        if gap is None:
            gap_res = math.inf
        else:
            # DIMACS-style gap measure at the solver-level objective scale
            # (the modeling constant is excluded, matching conelp's own view).
            scale = 1.0 + abs(pobj or 0.0) + abs(dobj or 0.0)
            gap_res = abs(gap) / scale
        dual_res = sol.get("dual infeasibility")
        dual_res = float(dual_res) if dual_res is not None else math.inf
        residuals = Residuals(primal_res, dual_res, gap_res)

        within = primal_res <= settings.feas_tol and gap_res <= settings.gap_tol
        if status is SolutionStatus.OPTIMAL and not within:
            status = SolutionStatus.NUMERICAL_FAILURE
        elif status is SolutionStatus.NUMERICAL_FAILURE and within:
            # CVXOPT gave up on its own (tighter) tolerances but the iterate
            # already satisfies the requested ones.
            status = SolutionStatus.OPTIMAL

        return SdpSolution(status, objective_value, assignments, residuals,
                           message=f"conelp status: {sol['status']}")

    @staticmethod
    def _reduce_equalities(A: Array, b: Array):
        """Drop dependent equality rows; return None when they are inconsistent.

        CVXOPT requires full row rank.  Dependent rows are either redundant
        (kept implicitly by projecting onto the row space) or contradictory,
        which decides feasibility outright.
        """
        u, s, _ = np.linalg.svd(A, full_matrices=True)
        cutoff = max(A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
        rank = int((s > cutoff).sum())
        if rank == A.shape[0]:
            return A, b
        rotated_b = u.T @ b
        # Rows beyond the rank have zero coefficients; a nonzero rhs there
        # means the system has no solution at all.
        if np.abs(rotated_b[rank:]).max(initial=0.0) > 1e-9 * (1.0 + np.abs(b).max()):
            return None
        basis = u[:, :rank].T
        return basis @ A, basis @ b

    @staticmethod
    def _primal_residual(problem: SdpProblem, dof_values: dict[int, Array]) -> float:
        worst = 0.0

        def lin_value(expr: LinearExpr) -> float:
            val = expr.constant
            for vid, c in expr.coeffs.items():
                val += float(c @ dof_values[vid])
            return val

        for expr, rhs in problem.linear_eq:
            worst = max(worst, abs(lin_value(expr) - rhs) / (1.0 + abs(rhs)))
        for expr, rhs in problem.linear_ineq:
            worst = max(worst, max(0.0, lin_value(expr) - rhs) / (1.0 + abs(rhs)))
        for block in problem.psd_constraints:
            value = block.evaluate(dof_values)
            lam_min = float(np.linalg.eigvalsh(_exact_sym(value))[0])
            scale = 1.0 + float(np.linalg.norm(block.constant, ord="fro"))
            worst = max(worst, max(0.0, -lam_min) / scale)
        return worst


DEFAULT_BACKEND = CvxoptConelpBackend()


def solve(problem: SdpProblem, settings: SolverSettings | None = None,
          backend=None) -> SdpSolution:
    """Solve the problem; never raises for solver trouble (see ``status``)."""
    if settings is None:
        settings = SolverSettings()
    if backend is None:
        backend = DEFAULT_BACKEND
    return backend.solve(problem, settings)
