import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decor import frobenius_norm, gram_schmidt_basis, matmul, row_cosine, thin_svd
from decor.linalg import as_matrix

from conftest import gram_sigma_oracle


def reconstruction_error(f, m):
    rec = (f.u * f.sigma) @ f.v.T
    denom = np.linalg.norm(m)
    return np.linalg.norm(rec - m) / denom if denom > 0 else np.linalg.norm(rec)


class TestThinSvd:
    def test_identity_2x2(self):
        f = thin_svd(np.eye(2))
        np.testing.assert_allclose(f.sigma, [1.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(f.u @ f.v.T, np.eye(2), atol=1e-14)

    def test_rank1_outer_product(self):
        a = np.array([3.0, 0.0])
        b = np.array([0.0, 2.0])
        f = thin_svd(np.outer(a, b))
        np.testing.assert_allclose(f.sigma, [6.0, 0.0], atol=1e-12)
        assert f.effective_rank == 1

    def test_random_77x768_against_gram_oracle(self):
        m = np.random.default_rng(7).standard_normal((77, 768))
        f = thin_svd(m)
        assert reconstruction_error(f, m) <= 1e-10
        # literal m^T m eigendecomposition: its top 77 eigenvalues are sigma^2
        eigs = np.linalg.eigvalsh(m.T @ m)
        oracle = np.sqrt(np.clip(eigs, 0.0, None))[::-1][:77]
        assert np.max(np.abs(f.sigma - oracle)) <= 1e-8 * oracle[0]
        assert np.abs(f.u.T @ f.u - np.eye(77)).max() <= 1e-8
        assert np.abs(f.v.T @ f.v - np.eye(77)).max() <= 1e-8

    def test_wide_and_tall_agree(self):
        m = np.random.default_rng(3).standard_normal((40, 9))
        f = thin_svd(m)
        ft = thin_svd(m.T)
        np.testing.assert_allclose(f.sigma, ft.sigma, rtol=1e-12)
        assert f.k == ft.k == 9

    def test_zero_matrix(self):
        f = thin_svd(np.zeros((3, 5)))
        np.testing.assert_array_equal(f.sigma, np.zeros(3))
        assert np.abs(f.v.T @ f.v - np.eye(3)).max() <= 1e-12
        assert f.effective_rank == 0

    def test_deterministic_sign_and_rerun(self):
        m = np.random.default_rng(11).standard_normal((10, 6))
        f1, f2 = thin_svd(m), thin_svd(m)
        np.testing.assert_array_equal(f1.u, f2.u)
        np.testing.assert_array_equal(f1.v, f2.v)
        dominant = f1.v[np.argmax(np.abs(f1.v), axis=0), np.arange(f1.k)]
        assert np.all(dominant > 0)

    def test_rejects_non_finite(self):
        m = np.ones((3, 4))
        m[1, 2] = np.nan
        with pytest.raises(ValueError, match=r"\(1, 2\)"):
            thin_svd(m)

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="non-empty"):
            thin_svd(np.zeros((0, 4)))

    @given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 16))
    def test_property_reconstruction_and_oracle(self, seed, rows, cols):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((rows, cols))
        # occasionally force rank deficiency
        if rows > 1 and seed % 3 == 0:
            m[-1] = m[0]
        f = thin_svd(m)
        assert f.k == min(rows, cols)
        assert reconstruction_error(f, m) <= 1e-10
        assert np.all(np.diff(f.sigma) <= 0) and f.sigma[-1] >= 0
        oracle = gram_sigma_oracle(m)
        # the squared-Gram oracle cannot resolve sigmas below ~sqrt(eps)*sigma_1,
        # so compare above that floor and only bound the rest
        scale = max(oracle[0], 1e-12)
        floor = 10 * np.sqrt(np.finfo(float).eps) * scale
        above = oracle > floor
        assert np.max(np.abs(f.sigma - oracle)[above], initial=0.0) <= 1e-8 * scale
        assert np.all(f.sigma[~above] <= 2e-7 * scale)
        k = f.k
        assert np.abs(f.u.T @ f.u - np.eye(k)).max() <= 1e-8
        assert np.abs(f.v.T @ f.v - np.eye(k)).max() <= 1e-8


class TestGramSchmidt:
    def test_already_orthogonal_rows(self):
        basis = gram_schmidt_basis(np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]]), 1e-10)
        assert basis.shape == (3, 2)
        np.testing.assert_allclose(np.abs(basis[:, 0]), [1, 0, 0], atol=1e-14)
        np.testing.assert_allclose(np.abs(basis[:, 1]), [0, 1, 0], atol=1e-14)

    def test_near_duplicate_row_dropped(self):
        basis = gram_schmidt_basis(np.array([[1.0, 0.0], [1.0, 1e-15]]), 1e-10)
        assert basis.shape == (2, 1)
        np.testing.assert_allclose(np.abs(basis[:, 0]), [1, 0], atol=1e-14)

    def test_all_rows_below_tolerance_gives_empty_basis(self):
        basis = gram_schmidt_basis(np.zeros((3, 4)), 1e-10)
        assert basis.shape == (4, 0)

    def test_random_5x64_matches_svd_projector(self):
        m = np.random.default_rng(5).standard_normal((5, 64))
        basis = gram_schmidt_basis(m, 1e-10)
        assert np.abs(basis.T @ basis - np.eye(5)).max() <= 1e-10
        f = thin_svd(m)
        p_svd = f.v @ f.v.T
        assert np.linalg.norm(basis @ basis.T - p_svd) <= 1e-8

    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_property_orthonormal_and_projector_match(self, seed, rows):
        m = np.random.default_rng(seed).standard_normal((rows, 24))
        basis = gram_schmidt_basis(m, 1e-10)
        r = basis.shape[1]
        assert r == rows  # random rows are full rank
        assert np.abs(basis.T @ basis - np.eye(r)).max() <= 1e-10
        f = thin_svd(m)
        keep = f.sigma > 1e-10 * f.sigma[0]
        p_svd = f.v[:, keep] @ f.v[:, keep].T
        assert np.linalg.norm(basis @ basis.T - p_svd) <= 1e-8


class TestUtilities:
    def test_row_cosine_self_and_antipodal(self):
        m = np.random.default_rng(2).standard_normal((6, 9))
        np.testing.assert_allclose(row_cosine(m, m), np.ones(6), atol=1e-12)
        np.testing.assert_allclose(row_cosine(m, -m), -np.ones(6), atol=1e-12)

    def test_row_cosine_zero_row_convention(self):
        a = np.array([[1.0, 0.0], [0.0, 0.0]])
        b = np.array([[1.0, 0.0], [1.0, 1.0]])
        np.testing.assert_array_equal(row_cosine(a, b), [1.0, 0.0])

    def test_row_cosine_shape_mismatch(self):
        with pytest.raises(ValueError, match=r"\(2, 3\).*\(3, 2\)"):
            row_cosine(np.ones((2, 3)), np.ones((3, 2)))

    def test_frobenius_pythagorean(self):
        assert frobenius_norm(np.array([[3.0, 0.0], [0.0, 4.0]])) == 5.0

    def test_matmul_and_shape_error(self):
        a = np.arange(6.0).reshape(2, 3)
        b = np.arange(12.0).reshape(3, 4)
        np.testing.assert_array_equal(matmul(a, b), a @ b)
        with pytest.raises(ValueError, match=r"\(2, 3\).*\(2, 4\)"):
            matmul(a, np.ones((2, 4)))

    def test_as_matrix_names_offending_index(self):
        m = np.ones((2, 2))
        m[0, 1] = np.inf
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            as_matrix(m)
