"""Closed-form Bures-Wasserstein metric on positive-(semi)definite matrices.

This module is the ground-truth oracle: every SDP-route result elsewhere in
the package is cross-checked against these formulas.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ClampWarning, DimensionMismatch
from .matrix_core import as_symmetric, sqrt_psd, _eigvalsh, _exact_sym


@dataclass(frozen=True)
class BwDistanceResult:
    """Squared distance, distance, and the cross (fidelity-type) trace term."""

    distance_squared: float
    distance: float
    fidelity_term: float


def _pair(A, B):
    a = as_symmetric(A)
    b = as_symmetric(B)
    if a.n != b.n:
        raise DimensionMismatch(f"dimension mismatch: {a.n} vs {b.n}")
    return a, b


def fidelity_term(A, B) -> float:
    """Trace of the symmetric square root of ``sqrt(A) B sqrt(A)``.

    Accepts positive-semidefinite inputs (small negative eigenvalues from
    round-off are clamped); genuinely indefinite input raises.
    """
    a, b = _pair(A, B)
    ra = sqrt_psd(a).entries
    inner = _exact_sym(ra @ b.entries @ ra)
    # Guard the inner product's own round-off before taking eigenvalues.
    w = _eigvalsh(inner)
    return float(np.sqrt(np.clip(w, 0.0, None)).sum())


def bw_distance_squared(A, B) -> BwDistanceResult:
    """Squared Bures-Wasserstein distance ``Tr A + Tr B - 2 Tr sqrt(sqrt(A) B sqrt(A))``.

    Negative values are clamped to zero.  Near-identical inputs legitimately
    produce negatives within ``-1e-9 * (Tr A + Tr B)``; anything below that
    window additionally raises a :class:`ClampWarning`, since it suggests the
    inputs were not PSD to begin with.
    """
    a, b = _pair(A, B)
    fid = fidelity_term(a, b)
    trace_sum = float(np.trace(a.entries) + np.trace(b.entries))
    raw = trace_sum - 2.0 * fid
    if raw < 0.0:
        if raw < -1e-9 * abs(trace_sum) - 1e-12:
            warnings.warn(
                f"clamping negative squared distance {raw:.3e} to 0; "
                "inputs may be indefinite", ClampWarning, stacklevel=2,
            )
        raw = 0.0
    return BwDistanceResult(raw, math.sqrt(raw), fid)


def bw_distance(A, B) -> float:
    return bw_distance_squared(A, B).distance
