"""Named verification suites: metric axioms, relaxation tightness, reference instances.

Each suite returns one :class:`CheckOutcome` per property with the worst
observed value across its instances; the CLI `check` command wraps these.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bw_core
from .barycenter import fixed_point_barycenter, solve_barycenter_sdp
from .bw_programs import BwBall, ObjectiveSpec, add_coupling_block, solve_ball_constrained
from .matrix_core import as_pd, clamp_psd, trace
from .sdp_model import SolverSettings, new_problem, solve, trace_product
from .sampling import random_pd
from .set_geometry import ConvexSetSpec, set_distance
from .errors import SolverFailure

Array = np.ndarray


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool
    tolerance: float
    observed: float
    detail: str = ""


def _outcome(name, observed, tolerance, detail=""):
    return CheckOutcome(name, bool(observed <= tolerance), tolerance,
                        float(observed), detail)


# ---------------------------------------------------------------------------
# Metric axioms
# ---------------------------------------------------------------------------


def metric_suite(instances: int = 200, seed: int = 20240) -> list[CheckOutcome]:
    """Symmetry, identity, triangle inequality, diagonal reduction, trace bound."""
    worst_sym = worst_ident = worst_tri = worst_diag = worst_trace = 0.0
    rng = np.random.default_rng(seed)
    for k in range(instances):
        n = 2 + k % 7  # dimensions 2..8
        a = random_pd(n, cond=10.0 ** rng.integers(0, 4), rng=rng)
        b = random_pd(n, cond=10.0 ** rng.integers(0, 4), rng=rng)
        c = random_pd(n, cond=10.0 ** rng.integers(0, 4), rng=rng)

        d_ab = bw_core.bw_distance_squared(a, b)
        d_ba = bw_core.bw_distance_squared(b, a)
        worst_sym = max(worst_sym, abs(d_ab.distance_squared - d_ba.distance_squared)
                        / (1.0 + d_ab.distance_squared))

        worst_ident = max(worst_ident,
                          bw_core.bw_distance_squared(a, a).distance_squared
                          / max(float(np.trace(a)), 1e-300))

        rho_ac = bw_core.bw_distance_squared(a, c).distance
        rho_bc = bw_core.bw_distance_squared(b, c).distance
        worst_tri = max(worst_tri, rho_ac - (d_ab.distance + rho_bc))

        da = np.diag(np.exp(rng.uniform(0.0, 3.0, size=n)))
        db = np.diag(np.exp(rng.uniform(0.0, 3.0, size=n)))
        expect = float(((np.sqrt(np.diag(da)) - np.sqrt(np.diag(db))) ** 2).sum())
        got = bw_core.bw_distance_squared(da, db).distance_squared
        worst_diag = max(worst_diag, abs(got - expect))

        bound = (math.sqrt(float(np.trace(a))) - math.sqrt(float(np.trace(b)))) ** 2
        worst_trace = max(worst_trace, bound - d_ab.distance_squared)

    return [
        _outcome("symmetry_relative", worst_sym, 1e-9),
        _outcome("identity_relative_to_trace", worst_ident, 1e-9),
        _outcome("triangle_inequality_slack", worst_tri, 1e-7),
        _outcome("diagonal_reduction", worst_diag, 1e-9),
        _outcome("trace_lower_bound_slack", worst_trace, 1e-9),
    ]


# ---------------------------------------------------------------------------
# Relaxation tightness (orthogonality of the optimal coupling)
# ---------------------------------------------------------------------------


def solve_trace_maximization(K: Array, G: Array | None = None,
                             settings: SolverSettings | None = None):
    """``max Tr(K U)`` over ``[[G, U^T], [U, I]] >= 0`` (G defaults to I).

    Returns (optimal value, optimal U).
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    top_left = np.eye(n) if G is None else np.asarray(G, dtype=float)
    problem = new_problem()
    coupling = add_coupling_block(problem, top_left, name="U")
    problem.set_objective(-1.0 * trace_product(K, coupling))
    solution = solve(problem, settings)
    if solution.status.value != "optimal":
        raise SolverFailure(f"trace maximization: {solution.status.value}")
    return -solution.objective_value, solution.value(problem.variable("U"))


def nuclear_norm_oracle(K: Array, G: Array | None = None) -> float:
    """Independent optimum value: sum of singular values of ``sqrt(G) K``.

    Computed from the eigenvalues of the symmetric matrix ``K^T G K`` (of
    ``K^T K`` when G is the identity), never from an SDP.
    """
    K = np.asarray(K, dtype=float)
    inner = K.T @ K if G is None else K.T @ np.asarray(G, dtype=float) @ K
    w = np.linalg.eigvalsh((inner + inner.T) / 2.0)
    return float(np.sqrt(np.clip(w, 0.0, None)).sum())


def lemma_suite(instances: int = 20, seed: int = 777) -> list[CheckOutcome]:
    """Tightness of the trace-maximization SDP, plain and generalized."""
    rng = np.random.default_rng(seed)
    worst_value = worst_orth = worst_gen_value = worst_gen_orth = 0.0
    for k in range(instances):
        n = 2 + k % 5  # dimensions 2..6
        K = rng.standard_normal((n, n))

        value, U = solve_trace_maximization(K)
        worst_value = max(worst_value, abs(value - nuclear_norm_oracle(K)))
        worst_orth = max(worst_orth,
                         float(np.linalg.norm(U.T @ U - np.eye(n), ord="fro")))

        G = random_pd(n, cond=50.0, rng=rng)
        value_g, U_g = solve_trace_maximization(K, G)
        worst_gen_value = max(worst_gen_value, abs(value_g - nuclear_norm_oracle(K, G)))
        worst_gen_orth = max(worst_gen_orth,
                             float(np.linalg.norm(U_g.T @ U_g - G, ord="fro")))

    return [
        _outcome("objective_equals_nuclear_norm", worst_value, 1e-6),
        _outcome("coupling_orthogonality", worst_orth, 1e-5),
        _outcome("generalized_objective", worst_gen_value, 1e-6),
        _outcome("generalized_coupling_saturation", worst_gen_orth, 1e-5),
    ]


# ---------------------------------------------------------------------------
# Reference instances
# ---------------------------------------------------------------------------


def table1_suite(settings: SolverSettings | None = None) -> list[CheckOutcome]:
    """Reproduce the three published reference results shipped as fixtures."""
    from .fileio import read_barycenter_problem, read_balls, read_matrix, table1_path

    outcomes = []

    problem = read_barycenter_problem(table1_path("barycenter_problem.json"))
    x_opt = read_matrix(table1_path("x_opt.json")).entries
    x_fp = read_matrix(table1_path("x_fp.json")).entries
    via_sdp = solve_barycenter_sdp(problem, settings)
    via_fp = fixed_point_barycenter(problem)
    outcomes.append(_outcome(
        "barycenter_sdp_vs_reference",
        float(np.abs(via_sdp.X.entries - x_opt).max()), 1e-3))
    outcomes.append(_outcome(
        "barycenter_fixed_point_vs_reference",
        float(np.abs(via_fp.X.entries - x_fp).max()), 1e-3))
    outcomes.append(_outcome(
        "barycenter_route_agreement",
        float(np.abs(via_sdp.X.entries - via_fp.X.entries).max()), 2e-3))

    spec_a = ConvexSetSpec(5, trace_eq=1.0)
    spec_b = ConvexSetSpec(5, trace_eq=2.0)
    result = set_distance(spec_a, spec_b, settings=settings)
    target = (math.sqrt(2.0) - 1.0) ** 2
    outcomes.append(_outcome(
        "set_distance_value",
        abs(result.distance_squared - target), 1e-3,
        detail=f"converged={result.converged} after {result.iterations} half-steps"))
    outcomes.append(_outcome(
        "set_witness_proportionality",
        float(np.abs(result.witness_b.entries - 2.0 * result.witness_a.entries).max()),
        1e-3))

    balls = read_balls(table1_path("balls.json"))
    x_ref = read_matrix(table1_path("ball_x.json")).entries
    x_star, _ = solve_ball_constrained(ObjectiveSpec.frobenius(), balls, settings=settings)
    outcomes.append(_outcome(
        "ball_solve_vs_reference",
        float(np.abs(x_star.entries - x_ref).max()), 1e-2))
    rho2 = bw_core.bw_distance_squared(
        balls[0].center, clamp_psd(x_star)).distance_squared
    outcomes.append(_outcome(
        "ball_constraint_active", abs(rho2 - balls[0].radius_squared), 2e-2))
    outcomes.append(_outcome(
        "ball_soundness", rho2 - balls[0].radius_squared, 1e-3))

    return outcomes


SUITES = {
    "metric": metric_suite,
    "lemma": lemma_suite,
    "table1": table1_suite,
}


def ball_soundness_suite(instances: int = 20, seed: int = 4242,
                         settings: SolverSettings | None = None) -> list[CheckOutcome]:
    """Seeded ball-constrained solves, each re-validated with the closed form."""
    rng = np.random.default_rng(seed)
    worst = -math.inf
    objectives = [ObjectiveSpec.frobenius(), ObjectiveSpec.trace()]
    for k in range(instances):
        n = 2 + k % 3
        center = as_pd(random_pd(n, cond=30.0, rng=rng))
        # Radius below the distance to the unconstrained minimizer keeps the
        # constraint active for both objective kinds (minimizer is X = 0).
        radius_squared = 0.5 * trace(center)
        ball = BwBall(center=center, radius_squared=radius_squared)
        objective = objectives[k % len(objectives)]
        x_star, _ = solve_ball_constrained(objective, [ball], settings=settings)
        rho2 = bw_core.bw_distance_squared(center, clamp_psd(x_star)).distance_squared
        worst = max(worst, rho2 - radius_squared)
    return [_outcome("ball_soundness_violation", worst, 1e-3)]
