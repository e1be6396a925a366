import math

import numpy as np
import pytest
import scipy.linalg

from bica.errors import InvalidData, InvalidDimension, RankDeficient
from bica.linalg import center, center_whiten, random_orthonormal, sym_decorrelate, whiten


def test_center_identity_on_zero_mean():
    x = np.array([[-1.0, 0.0, 1.0], [2.0, -4.0, 2.0]])
    c, mean = center(x)
    np.testing.assert_array_equal(c, x)
    np.testing.assert_array_equal(mean, [0.0, 0.0])


def test_center_single_row():
    c, mean = center([1.0, 2.0, 3.0])
    np.testing.assert_allclose(c, [[-1.0, 0.0, 1.0]])
    np.testing.assert_allclose(mean, [2.0])


def test_center_random_rows_summation_oracle(rng):
    x = rng.normal(5.0, 3.0, size=(3, 1000))
    c, mean = center(x)
    for row in c:
        assert abs(math.fsum(row) / row.size) < 1e-12
    for i in range(3):
        assert mean[i] == pytest.approx(math.fsum(x[i]) / 1000, abs=1e-12)


def test_center_rejects_nonfinite():
    with pytest.raises(InvalidData):
        center([[1.0, np.nan, 2.0]])


def test_whiten_already_white(rng):
    z = rng.standard_normal((3, 5000))
    z = center_whiten(z).whitened
    res = whiten(z)
    t = res.transform
    np.testing.assert_allclose(t @ t.T, np.eye(3), atol=1e-8)
    np.testing.assert_allclose(np.cov(res.whitened), np.eye(3), atol=1e-8)


def test_whiten_scaled_noise(rng):
    x = np.diag([2.0, 0.5]) @ rng.standard_normal((2, 4000))
    res = whiten(center(x)[0])
    np.testing.assert_allclose(np.cov(res.whitened, ddof=1), np.eye(2), atol=1e-8)


def test_whiten_rank_deficient(rng):
    r = rng.standard_normal(100)
    with pytest.raises(RankDeficient):
        whiten(center(np.vstack([r, r]))[0])


def test_symmetric_whitening_keeps_white_frame(rng):
    z = center_whiten(rng.standard_normal((2, 5000))).whitened
    res = whiten(z, symmetric=True)
    np.testing.assert_allclose(res.transform, np.eye(2), atol=1e-10)


def test_whiten_center_invariants(rng):
    x = rng.standard_normal((4, 4)) @ rng.standard_normal((4, 3000)) + 7.0
    z = center_whiten(x).whitened
    np.testing.assert_allclose(z.mean(axis=1), 0.0, atol=1e-12)
    np.testing.assert_allclose(np.cov(z), np.eye(4), atol=1e-8)


def test_sym_decorrelate_orthonormal_identity():
    q = random_orthonormal(4, 3)
    np.testing.assert_allclose(sym_decorrelate(q), q, atol=1e-12)


def test_sym_decorrelate_scalar():
    np.testing.assert_allclose(sym_decorrelate(2.0 * np.eye(3)), np.eye(3), atol=1e-15)


def test_sym_decorrelate_sqrtm_oracle(rng):
    W = rng.standard_normal((4, 4))
    O = sym_decorrelate(W)
    root = scipy.linalg.sqrtm(W @ W.T).real
    np.testing.assert_allclose(O, np.linalg.solve(root, W), atol=1e-10)
    np.testing.assert_allclose(O @ O.T, np.eye(4), atol=1e-10)


def test_sym_decorrelate_idempotent_and_span(rng):
    W = rng.standard_normal((3, 3))
    once = sym_decorrelate(W)
    np.testing.assert_allclose(sym_decorrelate(once), once, atol=1e-10)
    # same row space: projector onto span(rows) unchanged
    P = lambda A: A.T @ np.linalg.solve(A @ A.T, A)
    np.testing.assert_allclose(P(once), P(W), atol=1e-8)


def test_sym_decorrelate_singular():
    with pytest.raises(RankDeficient):
        sym_decorrelate(np.array([[1.0, 2.0], [2.0, 4.0]]))


def test_random_orthonormal_deterministic():
    np.testing.assert_array_equal(random_orthonormal(2, 7), random_orthonormal(2, 7))
    assert not np.array_equal(random_orthonormal(2, 7), random_orthonormal(2, 8))


def test_random_orthonormal_determinant():
    for seed in range(1, 101):
        W = random_orthonormal(3, seed)
        assert np.abs(W @ W.T - np.eye(3)).max() <= 1e-10
        assert abs(abs(np.linalg.det(W)) - 1.0) <= 1e-8


def test_random_orthonormal_dimension():
    with pytest.raises(InvalidDimension):
        random_orthonormal(1, 0)
