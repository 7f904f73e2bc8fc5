"""Command-line interface; every command emits one JSON run report.

Exit codes: 0 success, 2 input error, 3 solver failure, 4 a closed-form
validation or check-suite property failed.  No solver output reaches a
successful report unvalidated: each report carries a ``validations`` list
pairing every result with the tolerance it was checked against.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import bw_core, checks
from .barycenter import fixed_point_barycenter, solve_barycenter_sdp
from .bw_programs import ObjectiveSpec, solve_ball_constrained
from .errors import (
    AsymmetryError,
    DimensionMismatch,
    InfeasibleSet,
    NotPdError,
    SolverFailure,
    UnboundedSubproblem,
)
from .fileio import (
    InputFormatError,
    file_sha256,
    matrix_to_obj,
    read_balls,
    read_barycenter_problem,
    read_matrix,
    read_pd_matrix,
    read_set_spec,
    write_matrix,
)
from .matrix_core import PD_TOLERANCE, clamp_psd, frobenius_norm, is_pd
from .sampling import random_pd
from .sdp_model import SolverSettings
from .set_geometry import constraint_violation, set_distance

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4

_INPUT_ERRORS = (InputFormatError, AsymmetryError, NotPdError, DimensionMismatch,
                 InfeasibleSet, ValueError, OSError)
_SOLVER_ERRORS = (SolverFailure, UnboundedSubproblem)


def _validation(name, observed, tolerance, passed=None):
    observed = float(observed)
    if passed is None:
        passed = observed <= tolerance
    return {"name": name, "observed": observed, "tolerance": tolerance,
            "passed": bool(passed)}


def _solver_settings(args) -> SolverSettings:
    tol = getattr(args, "solver_tol", None)
    if tol is None:
        env = os.environ.get("BWKIT_SOLVER_TOL")
        if env:
            tol = float(env)
    if tol is None:
        return SolverSettings()
    return SolverSettings(feas_tol=tol, gap_tol=tol)


def _settings_dict(settings: SolverSettings, **extra) -> dict:
    out = {"solver_feas_tol": settings.feas_tol, "solver_gap_tol": settings.gap_tol,
           "solver_max_iter": settings.max_iter}
    out.update(extra)
    return out


def _min_eigenvalue(M) -> float:
    return float(np.linalg.eigvalsh(np.asarray(M, dtype=float))[0])


# ---------------------------------------------------------------------------
# Commands: each returns (inputs, settings_dict, result, validations)
# ---------------------------------------------------------------------------


def _cmd_dist(args, settings: SolverSettings):
    A = read_pd_matrix(args.a)
    B = read_pd_matrix(args.b)
    closed = bw_core.bw_distance_squared(A, B)
    closed_rev = bw_core.bw_distance_squared(B, A)

    result = {"closed_form": {
        "distance_squared": closed.distance_squared,
        "distance": closed.distance,
        "fidelity_term": closed.fidelity_term,
    }}
    validations = [_validation(
        "closed_form_symmetry",
        abs(closed.distance_squared - closed_rev.distance_squared),
        1e-9 * (1.0 + closed.distance_squared),
    )]

    if args.method in ("sdp", "both"):
        from .bw_programs import solve_distance

        sdp = solve_distance(A, B, settings)
        deviation = abs(sdp.distance_squared - closed.distance_squared)
        result["sdp"] = {
            "distance_squared": sdp.distance_squared,
            "tightness_residual": sdp.tightness_residual,
            "coupling": matrix_to_obj(sdp.coupling, "optimal coupling"),
        }
        result["deviation_sdp_vs_closed"] = deviation
        validations.append(_validation(
            "sdp_matches_closed_form", deviation,
            1e-5 * (1.0 + closed.distance_squared)))
        validations.append(_validation(
            "coupling_tightness", sdp.tightness_residual,
            1e-4 * (1.0 + frobenius_norm(B))))

    return [args.a, args.b], _settings_dict(settings, method=args.method), \
        result, validations


def _cmd_set_dist(args, settings: SolverSettings):
    spec_a = read_set_spec(args.spec_a)
    spec_b = read_set_spec(args.spec_b)
    r = set_distance(spec_a, spec_b, tol=args.tol, max_iter=args.max_iter,
                     settings=settings)

    closed = bw_core.bw_distance_squared(
        clamp_psd(r.witness_a), clamp_psd(r.witness_b)).distance_squared
    history = r.objective_history
    worst_increase = max(
        (history[k + 1] - history[k] for k in range(len(history) - 1)),
        default=0.0,
    )
    result = {
        "distance_squared": r.distance_squared,
        "witness_a": matrix_to_obj(r.witness_a, "witness in first set"),
        "witness_b": matrix_to_obj(r.witness_b, "witness in second set"),
        "iterations": r.iterations,
        "objective_history": list(history),
        "converged": r.converged,
        "closed_form_cross_check": closed,
    }
    validations = [
        _validation("closed_form_cross_check",
                    abs(r.distance_squared - closed), 1e-4),
        _validation("objective_monotone_descent", worst_increase, 1e-9),
        _validation("witness_a_membership",
                    constraint_violation(spec_a, r.witness_a), 1e-6),
        _validation("witness_b_membership",
                    constraint_violation(spec_b, r.witness_b), 1e-6),
        _validation("converged_within_max_iter", float(r.iterations),
                    float(2 * args.max_iter), passed=r.converged),
    ]
    return [args.spec_a, args.spec_b], \
        _settings_dict(settings, tol=args.tol, max_iter=args.max_iter), \
        result, validations


def _cmd_barycenter(args, settings: SolverSettings):
    problem = read_barycenter_problem(args.problem)
    inputs = [args.problem]

    result = {}
    validations = []
    routes = {}
    if args.route in ("sdp", "both"):
        routes["sdp"] = solve_barycenter_sdp(problem, settings)
    if args.route in ("fp", "both"):
        routes["fixed_point"] = fixed_point_barycenter(
            problem, tol=args.fp_tol, max_iter=args.fp_max_iter)

    for label, res in routes.items():
        result[label] = {
            "X": matrix_to_obj(res.X, f"barycenter ({label})"),
            "objective_closed_form": res.objective,
            "iterations": res.iterations,
            "residual": res.residual,
            "converged": res.converged,
        }
        validations.append(_validation(
            f"{label}_psd_violation", max(0.0, -_min_eigenvalue(res.X)), 1e-7))
        if label == "fixed_point":
            validations.append(_validation(
                "fixed_point_converged", float(res.iterations),
                float(args.fp_max_iter), passed=res.converged))

    if len(routes) == 2:
        dev = float(np.abs(routes["sdp"].X.entries
                           - routes["fixed_point"].X.entries).max())
        obj_dev = abs(routes["sdp"].objective - routes["fixed_point"].objective)
        result["max_entry_deviation"] = dev
        result["objective_deviation"] = obj_dev
        validations.append(_validation("route_agreement_per_entry", dev, 2e-3))
        validations.append(_validation("route_agreement_objective", obj_dev, 1e-4))

    return inputs, _settings_dict(settings, route=args.route, fp_tol=args.fp_tol,
                                  fp_max_iter=args.fp_max_iter), \
        result, validations


def _cmd_ball_solve(args, settings: SolverSettings):
    balls = read_balls(args.balls)
    inputs = [args.balls]
    base_set = None
    if args.base_set:
        base_set = read_set_spec(args.base_set)
        inputs.append(args.base_set)

    if args.objective == "linear":
        if not args.linear_c:
            raise InputFormatError("--objective linear requires --linear-c FILE")
        inputs.append(args.linear_c)
        objective = ObjectiveSpec.linear(read_matrix(args.linear_c))
    elif args.objective == "trace":
        objective = ObjectiveSpec.trace()
    else:
        objective = ObjectiveSpec.frobenius()

    x_star, value = solve_ball_constrained(objective, balls, base_set, settings)
    x_clamped = clamp_psd(x_star)
    rho2 = [
        bw_core.bw_distance_squared(ball.center, x_clamped).distance_squared
        for ball in balls
    ]

    result = {
        "X": matrix_to_obj(x_star, "optimal matrix"),
        "objective_value": value,
        "distance_squared_to_centers": rho2,
        "radius_squared": [ball.radius_squared for ball in balls],
    }
    validations = [_validation(
        "X_psd_violation", max(0.0, -_min_eigenvalue(x_star)), 1e-7)]
    for idx, (val, ball) in enumerate(zip(rho2, balls)):
        validations.append(_validation(
            f"ball_{idx}_soundness", val - ball.radius_squared, 1e-3))
    if base_set is not None:
        validations.append(_validation(
            "base_set_membership", constraint_violation(base_set, x_star), 1e-6))

    return inputs, _settings_dict(settings, objective=args.objective), \
        result, validations


def _cmd_gen(args, settings: SolverSettings):
    if args.n < 1:
        raise InputFormatError("--n must be at least 1")
    if args.cond < 1.0:
        raise InputFormatError("--cond must be at least 1")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    files = []
    validations = []
    for idx in range(args.count):
        matrix = random_pd(args.n, cond=args.cond, rng=rng)
        name = f"pd_n{args.n}_seed{args.seed}_{idx:02d}.json"
        path = out_dir / name
        write_matrix(path, matrix, name=f"random pd n={args.n} seed={args.seed} #{idx}")
        files.append({"path": str(path), "sha256": file_sha256(path)})
        validations.append(_validation(
            f"{name}_is_pd", _min_eigenvalue(matrix), PD_TOLERANCE,
            passed=is_pd(matrix)))

    result = {"files": files}
    return [], _settings_dict(settings, n=args.n, seed=args.seed,
                              cond=args.cond, count=args.count), \
        result, validations


def _cmd_check(args, settings: SolverSettings):
    suite = checks.SUITES[args.suite]
    outcomes = suite(settings=settings) if args.suite == "table1" else suite()
    result = {"suite": args.suite,
              "outcomes": [dataclasses.asdict(o) for o in outcomes]}
    validations = [
        _validation(o.name, o.observed, o.tolerance, passed=o.passed)
        for o in outcomes
    ]
    return [], _settings_dict(settings, suite=args.suite), result, validations


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bwkit",
        description="Bures-Wasserstein distances, set distances, barycenters, "
                    "and ball-constrained convex programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--solver-tol", type=float, default=None,
                       help="override solver feasibility/gap tolerance "
                            "(also via BWKIT_SOLVER_TOL)")
        p.add_argument("--out", type=str, default=None,
                       help="also write the JSON report to this file")

    p = sub.add_parser("dist", help="BW distance between two PD matrix files")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--method", choices=("closed", "sdp", "both"), default="both")
    common(p)
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("set-dist", help="BW distance between two convex sets")
    p.add_argument("spec_a")
    p.add_argument("spec_b")
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=200)
    common(p)
    p.set_defaults(func=_cmd_set_dist)

    p = sub.add_parser("barycenter", help="weighted BW barycenter of PD matrices")
    p.add_argument("problem")
    p.add_argument("--route", choices=("sdp", "fp", "both"), default="both")
    p.add_argument("--fp-tol", type=float, default=1e-10)
    p.add_argument("--fp-max-iter", type=int, default=500)
    common(p)
    p.set_defaults(func=_cmd_barycenter)

    p = sub.add_parser("ball-solve",
                       help="minimize an objective subject to BW-ball constraints")
    p.add_argument("balls")
    p.add_argument("--objective", choices=("frobenius", "trace", "linear"),
                   default="frobenius")
    p.add_argument("--linear-c", type=str, default=None,
                   help="coefficient matrix file for --objective linear")
    p.add_argument("--base-set", type=str, default=None,
                   help="optional convex set spec file for X")
    common(p)
    p.set_defaults(func=_cmd_ball_solve)

    p = sub.add_parser("gen", help="generate seeded random PD matrix files")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cond", type=float, default=10.0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--out-dir", type=str, required=True)
    common(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("check", help="run a named verification suite")
    p.add_argument("--suite", choices=sorted(checks.SUITES), required=True)
    common(p)
    p.set_defaults(func=_cmd_check)

    return parser


def _emit(report: dict, out_path) -> None:
    text = json.dumps(report, indent=2)
    if out_path:
        Path(out_path).write_text(text + "\n")
    print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    settings = _solver_settings(args)
    started = time.perf_counter()
    try:
        inputs, settings_dict, result, validations = args.func(args, settings)
    except _SOLVER_ERRORS as exc:
        _emit({"command": args.command, "status": "solver_failure",
               "error": str(exc)}, args.out)
        return EXIT_SOLVER
    except _INPUT_ERRORS as exc:
        _emit({"command": args.command, "status": "input_error",
               "error": str(exc)}, args.out)
        return EXIT_INPUT

    ok = all(v["passed"] for v in validations)
    report = {
        "command": args.command,
        "inputs": [{"path": str(p), "sha256": file_sha256(p)} for p in inputs],
        "settings": settings_dict,
        "result": result,
        "validations": validations,
        "status": "ok" if ok else "validation_failed",
        "duration_seconds": time.perf_counter() - started,
    }
    _emit(report, args.out)
    return EXIT_OK if ok else EXIT_VALIDATION


def entry_point() -> None:
    sys.exit(main())
