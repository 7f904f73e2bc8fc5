"""Seeded generation of random orthogonal and positive-definite matrices."""

from __future__ import annotations

import numpy as np

Array = np.ndarray


def random_orthogonal(n: int, rng: np.random.Generator) -> Array:
    """Orthogonal matrix from QR of a Gaussian draw, sign-fixed for determinism."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_pd(n: int, seed=None, cond: float = 10.0, rng=None) -> Array:
    """Random PD matrix ``Q diag(lam) Q^T`` with spectrum log-uniform in [1, cond].

    Deterministic for a fixed seed; ``rng`` may be passed instead to draw from
    an existing generator stream.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if cond < 1.0:
        raise ValueError("cond must be at least 1")
    if rng is None:
        rng = np.random.default_rng(seed)
    lam = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    q = random_orthogonal(n, rng)
    a = (q * lam) @ q.T
    return (a + a.T) / 2.0
