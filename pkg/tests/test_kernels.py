import numpy as np
import pytest

from dbforecast.core import NotPSD
from dbforecast.kernels import (
    GramMatrix,
    feature_factorize,
    feature_rows,
    gram,
    kernel_radius,
    linear_kernel,
    polynomial_kernel,
    rbf_kernel,
)


def test_gram_linear_orthonormal():
    g = gram(linear_kernel(), np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(g.entries, np.eye(2), atol=1e-15)


def test_gram_rbf_identical_rows():
    g = gram(rbf_kernel(1.0), np.array([[0.3, -0.7], [0.3, -0.7], [0.3, -0.7]]))
    assert np.allclose(g.entries, np.ones((3, 3)), atol=1e-15)


def test_gram_polynomial_by_hand():
    g = gram(polynomial_kernel(2, offset=1.0), np.array([[1.0], [2.0]]))
    assert np.allclose(g.entries, [[4.0, 9.0], [9.0, 25.0]], atol=1e-12)


def test_gram_permutation_equivariance():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((6, 3))
    perm = rng.permutation(6)
    g = gram(rbf_kernel(0.7), x).entries
    gp = gram(rbf_kernel(0.7), x[perm]).entries
    assert np.allclose(gp, g[np.ix_(perm, perm)], atol=1e-14)


def test_factorize_identity():
    phi = feature_factorize(GramMatrix(entries=np.eye(3)))
    assert phi.rows.shape == (3, 3)
    assert np.allclose(phi.rows @ phi.rows.T, np.eye(3), atol=1e-12)


def test_factorize_rank_one():
    phi = feature_factorize(GramMatrix(entries=np.ones((2, 2))))
    assert phi.rank == 1
    assert np.allclose(np.abs(phi.rows), 1.0, atol=1e-12)
    assert np.allclose(phi.rows @ phi.rows.T, np.ones((2, 2)), atol=1e-12)


def test_factorize_random_psd_reconstruction():
    rng = np.random.default_rng(1)
    for trial in range(10):
        b = rng.standard_normal((5, 5))
        g = GramMatrix(entries=b @ b.T)
        phi = feature_factorize(g)
        err = np.linalg.norm(phi.rows @ phi.rows.T - g.entries) / np.linalg.norm(g.entries)
        assert err <= 1e-8


def test_factorize_rejects_indefinite():
    with pytest.raises(NotPSD):
        feature_factorize(GramMatrix(entries=np.diag([1.0, -0.5])))


def test_factorize_zero_matrix_keeps_one_column():
    phi = feature_factorize(GramMatrix(entries=np.zeros((4, 4))))
    assert phi.rows.shape == (4, 1)
    assert np.all(phi.rows == 0.0)


def test_factorize_columns_ordered_by_weight():
    g = GramMatrix(entries=np.diag([1.0, 9.0, 4.0]))
    phi = feature_factorize(g)
    norms = np.linalg.norm(phi.rows, axis=0)
    assert np.all(np.diff(norms) <= 1e-12)


def test_linear_factorization_matches_raw_features():
    rng = np.random.default_rng(2)
    for trial in range(5):
        x = rng.standard_normal((7, 3))
        phi = feature_factorize(gram(linear_kernel(), x)).rows
        assert np.allclose(phi @ phi.T, x @ x.T, atol=1e-8)
        # predictions through Phi match predictions through X: the Gram
        # against any new point is reproducible from either factor
        w = rng.standard_normal(3)
        preds_x = x @ w
        # map w into the Phi basis by least squares on the span
        coef, *_ = np.linalg.lstsq(phi.T @ phi, phi.T @ preds_x, rcond=None)
        assert np.allclose(phi @ coef, preds_x, atol=1e-8)


def test_feature_rows_linear_shortcut():
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    phi = feature_rows(linear_kernel(), x)
    assert np.array_equal(phi.rows, x)


def test_feature_rows_rbf_reproduces_gram():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((8, 2))
    g = gram(rbf_kernel(0.5), x)
    phi = feature_rows(rbf_kernel(0.5), x)
    assert np.allclose(phi.rows @ phi.rows.T, g.entries, atol=1e-8)


def test_kernel_radius_cases():
    assert kernel_radius(rbf_kernel(3.0), np.random.default_rng(4).standard_normal((5, 2))) == 1.0
    assert kernel_radius(linear_kernel(), np.array([[3.0, 4.0], [0.0, 1.0]])) == pytest.approx(5.0)
    assert kernel_radius(polynomial_kernel(2, 1.0), np.array([[1.0], [2.0]])) == pytest.approx(5.0)


def test_kernel_spec_validation():
    with pytest.raises(ValueError):
        rbf_kernel(-1.0)
    with pytest.raises(ValueError):
        polynomial_kernel(0)
    with pytest.raises(ValueError):
        from dbforecast.kernels import KernelSpec

        KernelSpec(kind="sigmoid")


def test_gram_psd_across_kernels():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((10, 3))
    for k in (linear_kernel(), polynomial_kernel(3, 0.5), rbf_kernel(2.0)):
        lam = np.linalg.eigvalsh(gram(k, x).entries)
        assert lam[0] >= -1e-8 * max(lam[-1], 1.0)
