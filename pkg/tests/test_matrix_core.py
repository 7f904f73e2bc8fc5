import numpy as np
import pytest

from bwkit import (
    AsymmetryError,
    DimensionMismatch,
    NotPdError,
    NotPsdError,
    as_pd,
    eig_sym,
    frobenius_norm,
    inv_sqrt_pd,
    is_pd,
    sqrt_psd,
    symmetrize,
    trace,
)
from bwkit.sampling import random_pd


class TestSymmetrize:
    def test_already_symmetric(self):
        s = symmetrize([[1.0, 2.0], [2.0, 3.0]])
        np.testing.assert_array_equal(s.entries, [[1.0, 2.0], [2.0, 3.0]])

    def test_averages_tiny_asymmetry(self):
        s = symmetrize([[1.0, 2.0 + 1e-13], [2.0, 3.0]])
        np.testing.assert_allclose(s.entries, [[1.0, 2.0], [2.0, 3.0]], atol=1e-12)
        np.testing.assert_array_equal(s.entries, s.entries.T)

    def test_rejects_gross_asymmetry(self):
        with pytest.raises(AsymmetryError):
            symmetrize([[1.0, 5.0], [2.0, 3.0]])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionMismatch):
            symmetrize(np.zeros((2, 3)))

    def test_entries_read_only(self):
        s = symmetrize(np.eye(3))
        with pytest.raises(ValueError):
            s.entries[0, 0] = 7.0


class TestEigSym:
    def test_identity(self):
        dec = eig_sym(np.eye(3))
        np.testing.assert_allclose(dec.eigenvalues, [1.0, 1.0, 1.0])

    def test_diagonal_sorted_descending(self):
        dec = eig_sym(np.diag([4.0, 1.0]))
        np.testing.assert_allclose(dec.eigenvalues, [4.0, 1.0])
        np.testing.assert_allclose(np.abs(dec.eigenvectors), np.eye(2), atol=1e-14)

    def test_two_by_two_hand_computed(self):
        # char poly of [[2,1],[1,2]]: (2-l)^2 - 1 = 0 -> l in {3, 1}
        dec = eig_sym([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(dec.eigenvalues, [3.0, 1.0], atol=1e-12)

    @pytest.mark.parametrize("seed", range(6))
    def test_reconstruction_and_orthogonality(self, seed):
        s = random_pd(5, seed=seed, cond=1e4)
        dec = eig_sym(s)
        q, lam = dec.eigenvectors, dec.eigenvalues
        rebuilt = (q * lam) @ q.T
        assert np.linalg.norm(rebuilt - s) <= 1e-10 * (1 + np.linalg.norm(s))
        assert np.linalg.norm(q.T @ q - np.eye(5)) <= 1e-10 * 5

    @pytest.mark.parametrize("seed", range(6))
    def test_eigenvalue_sum_matches_trace(self, seed):
        s = random_pd(6, seed=seed, cond=100.0)
        dec = eig_sym(s)
        total = float(np.trace(s))
        assert abs(dec.eigenvalues.sum() - total) <= 1e-10 * abs(total)


class TestSqrtPsd:
    def test_identity(self):
        np.testing.assert_allclose(sqrt_psd(np.eye(5)).entries, np.eye(5), atol=1e-14)

    def test_diagonal(self):
        np.testing.assert_allclose(
            sqrt_psd(np.diag([4.0, 9.0])).entries, np.diag([2.0, 3.0]), atol=1e-13)

    def test_hand_computed(self):
        # [[2,1],[1,2]]^2 = [[5,4],[4,5]]
        r = sqrt_psd([[5.0, 4.0], [4.0, 5.0]])
        np.testing.assert_allclose(r.entries, [[2.0, 1.0], [1.0, 2.0]], atol=1e-12)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPsdError):
            sqrt_psd(np.diag([1.0, -1.0]))

    def test_clamps_tiny_negative(self):
        r = sqrt_psd(np.diag([1.0, -1e-12]))
        assert r.entries[1, 1] == 0.0

    @pytest.mark.parametrize("seed", range(8))
    def test_square_reconstructs(self, seed):
        s = random_pd(4 + seed % 3, seed=seed, cond=10.0 ** (seed % 5))
        r = sqrt_psd(s).entries
        assert np.linalg.norm(r @ r - s) <= 1e-8 * (1 + np.linalg.norm(s))

    @pytest.mark.parametrize("c", [0.25, 4.0])
    def test_scaling(self, c):
        s = random_pd(5, seed=11, cond=100.0)
        lhs = sqrt_psd(c * s).entries
        rhs = np.sqrt(c) * sqrt_psd(s).entries
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


class TestInvSqrtPd:
    def test_identity(self):
        np.testing.assert_allclose(inv_sqrt_pd(np.eye(4)).entries, np.eye(4))

    def test_diagonal(self):
        np.testing.assert_allclose(
            inv_sqrt_pd(np.diag([4.0, 9.0])).entries,
            np.diag([0.5, 1.0 / 3.0]), atol=1e-14)

    def test_scalar_multiple_of_identity(self):
        np.testing.assert_allclose(
            inv_sqrt_pd(4.0 * np.eye(3)).entries, 0.5 * np.eye(3), atol=1e-14)

    def test_rejects_singular(self):
        with pytest.raises(NotPdError):
            inv_sqrt_pd(np.diag([1.0, 0.0]))

    @pytest.mark.parametrize("seed", range(5))
    def test_whitening(self, seed):
        p = random_pd(5, seed=seed, cond=1e6)
        r = inv_sqrt_pd(p).entries
        assert np.linalg.norm(r @ p @ r - np.eye(5)) <= 1e-8 * 5

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_inverse_of_sqrt(self, seed):
        p = random_pd(4, seed=100 + seed, cond=1e6)
        lhs = inv_sqrt_pd(p).entries
        rhs = np.linalg.inv(sqrt_psd(p).entries)
        assert np.linalg.norm(lhs - rhs) <= 1e-7 * np.linalg.norm(rhs)


class TestScalars:
    def test_trace(self):
        assert trace(np.eye(5)) == 5.0

    def test_frobenius_norm(self):
        assert frobenius_norm(np.diag([3.0, 4.0])) == pytest.approx(5.0)

    def test_is_pd(self):
        assert not is_pd(np.diag([1.0, -1.0]))
        assert is_pd(np.eye(2))
        assert not is_pd(np.diag([1.0, 0.0]))


class TestPdMatrix:
    def test_certificate_is_min_eigenvalue(self):
        p = as_pd(np.diag([2.0, 5.0]))
        assert p.min_eigenvalue_certificate == pytest.approx(2.0)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPdError):
            as_pd(np.diag([1.0, -0.5]))
