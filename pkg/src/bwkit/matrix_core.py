"""Dense symmetric linear algebra: validation, eigendecomposition, square roots.

All functions accept plain arrays, nested lists, :class:`SymmetricMatrix` or
:class:`PdMatrix` and operate in double precision.  Everything here is a pure
function of its inputs; the wrapper types are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AsymmetryError,
    ConvergenceError,
    DimensionMismatch,
    NotPdError,
    NotPsdError,
)

Array = np.ndarray

#: Eigenvalues below ``PD_TOLERANCE * max(1, lambda_max)`` fail PD checks.
PD_TOLERANCE = 1e-10

#: Eigenvalues in ``[-NEG_EIG_TOLERANCE * (1 + lambda_max), 0)`` are clamped
#: to zero inside :func:`sqrt_psd`; anything below that window is an error.
NEG_EIG_TOLERANCE = 1e-10

#: Scale factor for the default asymmetry tolerance of :func:`symmetrize`.
ASYM_TOLERANCE_SCALE = 1e-8


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """Dense real symmetric matrix; ``entries`` is read-only and exactly symmetric."""

    entries: Array

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatch("matrix dimension must be at least 1")
        if not np.array_equal(arr, arr.T):
            raise AsymmetryError("entries are not exactly symmetric; use symmetrize()")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True, eq=False)
class PdMatrix:
    """Positive-definite matrix with the smallest eigenvalue found at validation."""

    base: SymmetricMatrix
    min_eigenvalue_certificate: float

    @property
    def entries(self) -> Array:
        return self.base.entries

    @property
    def n(self) -> int:
        return self.base.n

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.base.entries, dtype=dtype)


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral factorization Q diag(eigenvalues) Q^T with eigenvalues sorted descending."""

    eigenvalues: Array
    eigenvectors: Array


def asmat(a) -> Array:
    """Return the underlying dense float array of any accepted matrix input."""
    if isinstance(a, PdMatrix):
        return a.base.entries
    if isinstance(a, SymmetricMatrix):
        return a.entries
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    return arr


def _exact_sym(arr: Array) -> Array:
    # (a + a.T) / 2 is exactly symmetric in floating point.
    return (arr + arr.T) / 2.0


def symmetrize(raw, tol: float | None = None) -> SymmetricMatrix:
    """Average a nearly-symmetric square grid into a :class:`SymmetricMatrix`.

    Parameters
    ----------
    raw : array-like
        Square grid of reals.
    tol : float, optional
        Maximum tolerated entrywise asymmetry ``max|raw - raw^T|``.  Defaults
        to ``1e-8 * (1 + max|raw|)``, sized for text-serialized input.

    Raises
    ------
    AsymmetryError
        If the asymmetry exceeds ``tol`` (signals a corrupted input file).
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    if tol is None:
        scale = float(np.abs(arr).max()) if arr.size else 0.0
        tol = ASYM_TOLERANCE_SCALE * (1.0 + scale)
    gap = float(np.abs(arr - arr.T).max()) if arr.size else 0.0
    if gap > tol:
        raise AsymmetryError(f"asymmetry {gap:.3e} exceeds tolerance {tol:.3e}")
    return SymmetricMatrix(_exact_sym(arr))


def as_symmetric(a, tol: float | None = None) -> SymmetricMatrix:
    """Coerce to :class:`SymmetricMatrix`, symmetrizing raw arrays if needed."""
    if isinstance(a, PdMatrix):
        return a.base
    if isinstance(a, SymmetricMatrix):
        return a
    return symmetrize(a, tol=tol)


def as_pd(a, tol: float = PD_TOLERANCE) -> PdMatrix:
    """Validate positive definiteness and wrap in :class:`PdMatrix`.

    Raises
    ------
    NotPdError
        If the smallest eigenvalue is at or below ``tol * max(1, lambda_max)``.
    """
    if isinstance(a, PdMatrix):
        return a
    sym = as_symmetric(a)
    w = _eigvalsh(sym.entries)
    lam_min = float(w[0])
    lam_max = float(w[-1])
    if lam_min <= tol * max(1.0, lam_max):
        raise NotPdError(
            f"matrix is not positive definite: min eigenvalue {lam_min:.3e}"
        )
    return PdMatrix(sym, lam_min)


def _eigvalsh(arr: Array) -> Array:
    try:
        return np.linalg.eigvalsh(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc


def _eigh(arr: Array) -> tuple[Array, Array]:
    try:
        return np.linalg.eigh(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - pathological input
        raise ConvergenceError(f"symmetric eigensolver failed: {exc}") from exc


def eig_sym(S) -> EigenDecomposition:
    """Spectral decomposition of a symmetric matrix, eigenvalues descending."""
    arr = as_symmetric(S).entries
    w, q = _eigh(arr)
    return EigenDecomposition(w[::-1].copy(), q[:, ::-1].copy())


def sqrt_psd(S, clamp: float = NEG_EIG_TOLERANCE) -> SymmetricMatrix:
    """Symmetric square root of a (near-)PSD matrix.

    Eigenvalues in ``[-clamp * (1 + lambda_max), 0)`` are treated as round-off
    and clamped to zero; anything more negative raises :class:`NotPsdError`.
    """
    arr = as_symmetric(S).entries
    w, q = _eigh(arr)
    lam_max = float(w[-1])
    floor = -clamp * (1.0 + max(lam_max, 0.0))
    if float(w[0]) < floor:
        raise NotPsdError(
            f"matrix has eigenvalue {w[0]:.3e} below the clamp threshold {floor:.3e}"
        )
    w = np.clip(w, 0.0, None)
    root = (q * np.sqrt(w)) @ q.T
    return SymmetricMatrix(_exact_sym(root))


def inv_sqrt_pd(P) -> SymmetricMatrix:
    """Inverse symmetric square root of a strictly positive-definite matrix."""
    pd = as_pd(P)
    w, q = _eigh(pd.entries)
    root = (q / np.sqrt(w)) @ q.T
    return SymmetricMatrix(_exact_sym(root))


def clamp_psd(S) -> SymmetricMatrix:
    """Project onto the PSD cone by flooring negative eigenvalues at zero.

    Intended for solver outputs that are PSD only up to solver tolerance.
    """
    arr = as_symmetric(S).entries
    w, q = _eigh(arr)
    if float(w[0]) >= 0.0:
        return SymmetricMatrix(_exact_sym(arr))
    w = np.clip(w, 0.0, None)
    return SymmetricMatrix(_exact_sym((q * w) @ q.T))


def trace(S) -> float:
    return float(np.trace(asmat(S)))


def frobenius_norm(S) -> float:
    return float(np.linalg.norm(asmat(S), ord="fro"))


def is_pd(S, tol: float = PD_TOLERANCE) -> bool:
    """True iff all eigenvalues exceed ``tol * max(1, lambda_max)``."""
    arr = asmat(S)
    if not np.allclose(arr, arr.T, atol=1e-12 * (1.0 + np.abs(arr).max())):
        return False
    w = _eigvalsh(_exact_sym(arr))
    return float(w[0]) > tol * max(1.0, float(w[-1]))
