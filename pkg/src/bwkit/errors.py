"""Exception hierarchy and warning categories shared across the package."""


class BwkitError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(BwkitError):
    """Operands or placements have incompatible shapes."""


class AsymmetryError(BwkitError):
    """Raw matrix input is asymmetric beyond tolerance (corrupted input)."""


class NotPdError(BwkitError):
    """A positive-definite matrix was required."""


class NotPsdError(NotPdError):
    """Matrix is indefinite beyond the clamping window.

    Subclasses :class:`NotPdError` because an indefinite matrix is in
    particular not positive definite.
    """


class ConvergenceError(BwkitError):
    """An iterative linear-algebra routine failed to converge."""


class UnknownVariable(BwkitError):
    """An expression references a variable not declared in its problem."""


class SolverFailure(BwkitError):
    """The conic solver did not return a usable optimal solution."""


class InfeasibleSet(BwkitError):
    """A constraint set turned out to be empty."""


class UnboundedSubproblem(BwkitError):
    """A subproblem objective is unbounded below over its constraint set."""


class ClampWarning(UserWarning):
    """Round-off produced a slightly negative quantity that was clamped to 0."""
