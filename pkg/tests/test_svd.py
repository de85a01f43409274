import numpy as np
import pytest
import scipy.sparse as sp

from distag import NumericError, cosine, project, truncated_svd

from oracles import dense_singular_values


class TestTruncatedSvd:
    def test_rank_one_matrix(self):
        space = truncated_svd(np.array([[2.0, 4.0], [1.0, 2.0]]), 1)
        # squared Frobenius norm is 4+16+1+4 = 25, all in one component
        assert space.singular_values == pytest.approx([5.0], abs=1e-12)
        rec = space.row_embeddings @ space.basis.T
        assert np.abs(rec - [[2, 4], [1, 2]]).max() < 1e-12

    def test_identity(self):
        space = truncated_svd(np.eye(3), 3)
        assert space.singular_values == pytest.approx([1, 1, 1], abs=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            n, c = rng.integers(2, 9, size=2)
            a = rng.integers(0, 10, size=(n, c)).astype(float)
            if not a.any():
                a[0, 0] = 1
            m = int(rng.integers(1, min(n, c) + 1))
            space = truncated_svd(a, m)
            want = dense_singular_values(a)
            got = space.singular_values
            assert np.abs(got - want[:len(got)]).max() < 1e-9
            # anything dropped as below-rank must be zero in the oracle too
            assert all(v < 1e-9 for v in want[len(got):m])

    def test_rank_deficiency_reported(self):
        a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [3.0, 6.0, 9.0]])
        space = truncated_svd(a, 3)
        assert space.dims == 1
        assert space.requested_dims == 3

    def test_zero_matrix_rejected(self):
        with pytest.raises(NumericError):
            truncated_svd(np.zeros((3, 3)), 2)

    def test_dims_out_of_range(self):
        with pytest.raises(ValueError):
            truncated_svd(np.eye(3), 4)
        with pytest.raises(ValueError):
            truncated_svd(np.eye(3), 0)

    def test_frobenius_identity_at_full_rank(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            a = rng.integers(0, 6, size=(6, 5)).astype(float)
            a[0, 0] = max(a[0, 0], 1)
            space = truncated_svd(a, 5)
            total = (space.singular_values ** 2).sum()
            assert total == pytest.approx(np.linalg.norm(a) ** 2, rel=1e-6)

    def test_reconstruction_error_monotone_in_dims(self):
        rng = np.random.default_rng(9)
        a = rng.integers(0, 7, size=(8, 6)).astype(float)
        errors = []
        for m in range(1, 7):
            space = truncated_svd(a, m)
            rec = space.row_embeddings @ space.basis.T
            errors.append(np.linalg.norm(a - rec))
        assert all(errors[i + 1] <= errors[i] + 1e-9 for i in range(len(errors) - 1))
        assert errors[-1] < 1e-8  # full rank reconstructs exactly

    def test_basis_orthonormal(self):
        rng = np.random.default_rng(2)
        a = sp.random(60, 30, density=0.2, random_state=4,
                      data_rvs=lambda s: rng.integers(1, 9, s)).tocsr()
        space = truncated_svd(a, 10)
        gram = space.basis.T @ space.basis
        assert np.abs(gram - np.eye(space.dims)).max() < 1e-8

    def test_sign_convention_and_determinism(self):
        a = np.diag([3.0, 2.0, 1.0]) @ np.array(
            [[-1, 0, 0], [0, -1, 0], [0, 0, -1.0]])
        one = truncated_svd(a, 3)
        two = truncated_svd(a, 3)
        for col in one.basis.T:
            assert col[np.argmax(np.abs(col))] > 0
        assert np.array_equal(one.basis, two.basis)
        assert np.array_equal(one.singular_values, two.singular_values)


class TestProject:
    def test_training_rows_consistent(self):
        rng = np.random.default_rng(6)
        a = rng.integers(0, 8, size=(12, 7)).astype(float)
        space = truncated_svd(a, 4)
        for i in (0, 5, 11):
            assert project(a[i], space) == pytest.approx(
                space.row_embeddings[i], abs=1e-8)

    def test_zero_vector(self):
        space = truncated_svd(np.eye(4), 2)
        assert project(np.zeros(4), space) == pytest.approx([0, 0])

    def test_linearity(self):
        rng = np.random.default_rng(8)
        a = rng.integers(0, 8, size=(9, 5)).astype(float)
        space = truncated_svd(a, 3)
        u, v = rng.normal(size=5), rng.normal(size=5)
        assert project(u + v, space) == pytest.approx(
            project(u, space) + project(v, space), abs=1e-10)

    def test_length_mismatch(self):
        space = truncated_svd(np.eye(4), 2)
        with pytest.raises(ValueError):
            project(np.ones(3), space)

    def test_sparse_row(self):
        a = np.eye(4)
        space = truncated_svd(a, 2)
        row = sp.csr_matrix(a[1][None, :])
        assert project(row, space) == pytest.approx(space.row_embeddings[1])


class TestCosine:
    def test_self_similarity(self):
        v = np.array([1.0, 2.0, 3.0])
        assert cosine(v, v) == pytest.approx(1.0)

    def test_disjoint_support_is_zero(self):
        assert cosine([1, 0, 2, 0], [0, 3, 0, 4]) == 0.0

    def test_scale_invariance(self):
        u = np.array([1.0, 2.0])
        v = np.array([2.0, 1.0])
        assert cosine(2 * u, 3 * v) == pytest.approx(cosine(u, v))

    def test_zero_norm_defined_as_zero(self):
        assert cosine([0, 0], [1, 1]) == 0.0
        assert cosine([0, 0], [0, 0]) == 0.0
