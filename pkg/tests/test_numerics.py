import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clvboost import DegenerateError, NumericalError, cholesky, group_criterion, pearson_cor, sym_top2_eig
from clvboost.numerics import correlation_top2, jacobi_eigh, sym_eigh


def _sym3_eigenvalues(S):
    """Closed-form (trigonometric) eigenvalues of a symmetric 3x3 matrix, decreasing."""
    p1 = S[0, 1] ** 2 + S[0, 2] ** 2 + S[1, 2] ** 2
    q = np.trace(S) / 3
    if p1 == 0:
        return np.sort(np.diag(S))[::-1]
    p2 = sum((S[i, i] - q) ** 2 for i in range(3)) + 2 * p1
    p = math.sqrt(p2 / 6)
    B = (S - q * np.eye(3)) / p
    detB = (B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
            - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
            + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0]))
    r = min(1.0, max(-1.0, detB / 2))
    phi = math.acos(r) / 3
    e1 = q + 2 * p * math.cos(phi)
    e3 = q + 2 * p * math.cos(phi + 2 * math.pi / 3)
    return np.array([e1, 3 * q - e1 - e3, e3])


def _sym2_eigenvalues(S):
    a, b, c = S[0, 0], S[1, 1], S[0, 1]
    m, d = (a + b) / 2, math.sqrt(((a - b) / 2) ** 2 + c * c)
    return np.array([m + d, m - d])


def _random_psd(rng, q, rank=None):
    A = rng.standard_normal((q, rank or q))
    return A @ A.T


class TestSymTop2Eig:
    def test_identity(self):
        lam1, u1, lam2 = sym_top2_eig(np.eye(2))
        assert lam1 == pytest.approx(1) and lam2 == pytest.approx(1)
        assert np.linalg.norm(u1) == pytest.approx(1)

    def test_two_by_two(self):
        lam1, u1, lam2 = sym_top2_eig([[2.0, 1.0], [1.0, 2.0]])
        assert lam1 == pytest.approx(3) and lam2 == pytest.approx(1)
        np.testing.assert_allclose(u1, [math.sqrt(0.5)] * 2, atol=1e-12)

    def test_scalar(self):
        lam1, u1, lam2 = sym_top2_eig([[0.25]])
        assert (lam1, lam2) == (0.25, 0.0)
        np.testing.assert_array_equal(u1, [1.0])

    def test_sign_convention(self):
        S = np.array([[1.0, -0.9], [-0.9, 1.2]])
        u1 = sym_top2_eig(S).u1
        assert u1[np.argmax(np.abs(u1))] > 0

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            sym_top2_eig([[1.0, 2.0], [0.0, 1.0]])

    @pytest.mark.parametrize("seed", range(20))
    def test_closed_form_small(self, seed):
        rng = np.random.default_rng(seed)
        for q, oracle in ((2, _sym2_eigenvalues), (3, _sym3_eigenvalues)):
            S = _random_psd(rng, q)
            lam1, u1, lam2 = sym_top2_eig(S)
            ref = oracle(S)
            assert lam1 == pytest.approx(ref[0], rel=1e-8)
            assert lam2 == pytest.approx(ref[1], rel=1e-8, abs=1e-12)
            assert np.max(np.abs(S @ u1 - lam1 * u1)) < 1e-8 * max(1, lam1)


class TestJacobi:
    @pytest.mark.parametrize("q", [1, 2, 5, 12])
    def test_reconstructs(self, q):
        S = _random_psd(np.random.default_rng(q), q)
        w, V = jacobi_eigh(S)
        np.testing.assert_allclose(V @ np.diag(w) @ V.T, S, atol=1e-10)
        np.testing.assert_allclose(V.T @ V, np.eye(q), atol=1e-12)
        assert np.all(np.diff(w) <= 0)

    def test_agrees_with_production_full_spectrum(self):
        S = _random_psd(np.random.default_rng(7), 9, rank=4)
        np.testing.assert_allclose(jacobi_eigh(S)[0], sym_eigh(S)[0], atol=1e-10)

    def test_sweep_cap(self):
        with pytest.raises(NumericalError):
            jacobi_eigh(_random_psd(np.random.default_rng(0), 8), max_sweeps=1)


class TestCholesky:
    def test_identity(self):
        np.testing.assert_array_equal(cholesky(np.eye(3)), np.eye(3))

    def test_hand_example(self):
        np.testing.assert_allclose(cholesky([[4.0, 2.0], [2.0, 5.0]]), [[2, 0], [1, 2]], atol=1e-15)

    def test_toy_covariance(self):
        from clvboost.simulate import DEFAULT_SIGMA

        L = cholesky(DEFAULT_SIGMA)
        np.testing.assert_allclose(L @ L.T, DEFAULT_SIGMA, atol=1e-12)
        assert np.all(np.diag(L) > 0)
        assert np.all(np.triu(L, 1) == 0)

    def test_not_pd(self):
        with pytest.raises(NumericalError, match="not positive definite"):
            cholesky([[1.0, 2.0], [2.0, 1.0]])


class TestPearson:
    def test_identities(self):
        a = np.array([1.0, 3.0, 2.0, 7.0])
        assert pearson_cor(a, a) == pytest.approx(1)
        assert pearson_cor(a, -a) == pytest.approx(-1)

    def test_hand_value(self):
        # 9 / sqrt(84) by hand
        assert pearson_cor([1, 2, 3], [1, 2, 4]) == pytest.approx(9 / math.sqrt(84), abs=1e-15)
        assert round(pearson_cor([1, 2, 3], [1, 2, 4]), 4) == 0.9820

    def test_constant_rejected(self):
        with pytest.raises(DegenerateError):
            pearson_cor([1, 1, 1], [1, 2, 3])


class TestGroupCriterion:
    def test_single_column(self):
        x = np.array([1.0, -2.0, 0.5, 0.5])
        T, v, c = group_criterion(x[:, None])
        nx = np.linalg.norm(x)
        np.testing.assert_allclose(c, x / nx)
        np.testing.assert_allclose(v, [1 / nx])
        assert T == pytest.approx((x @ c / 4) ** 2)

    def test_identical_columns(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(20)
        x = (x - x.mean()) / x.std(ddof=1)
        n = x.size
        T, v, c = group_criterion(np.column_stack([x, x]))
        # cross-product eigenvalue 2 ||x||^2 = 2 (n - 1)
        assert T == pytest.approx(2 * (n - 1) / n**2)
        assert abs(abs(c @ x) / np.linalg.norm(x) - 1) < 1e-12

    def test_orthogonal_tie_deterministic(self):
        X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        a = group_criterion(X)
        b = group_criterion(X.copy())
        np.testing.assert_array_equal(a[2], b[2])

    def test_degenerate(self):
        with pytest.raises(DegenerateError):
            group_criterion(np.zeros((5, 2)))

    @pytest.mark.parametrize("shape", [(30, 4), (6, 15)])
    def test_contract(self, shape):
        rng = np.random.default_rng(sum(shape))
        X = rng.standard_normal(shape)
        X -= X.mean(axis=0)
        n = shape[0]
        T, v, c = group_criterion(X)
        np.testing.assert_allclose(X @ v, c, atol=1e-12)
        assert np.linalg.norm(c) == pytest.approx(1, abs=1e-12)
        # c attains the criterion; random unit vectors never beat it
        assert np.sum((X.T @ c / n) ** 2) == pytest.approx(T, rel=1e-10)
        for _ in range(200):
            r = rng.standard_normal(n)
            r -= r.mean()
            r /= np.linalg.norm(r)
            assert np.sum((X.T @ r / n) ** 2) <= T * (1 + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(2, 6))
    def test_permutation_and_sign_invariance(self, seed, q):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((15, q))
        X -= X.mean(axis=0)
        T, v, c = group_criterion(X)
        perm = rng.permutation(q)
        signs = rng.choice([-1.0, 1.0], q)
        T2, v2, c2 = group_criterion(X[:, perm] * signs)
        assert T2 == pytest.approx(T, rel=1e-10)
        np.testing.assert_allclose(np.abs(X.T @ c), np.abs(X.T @ c2), atol=1e-9)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 6), st.booleans())
    def test_trace_bound(self, seed, q, rank_one):
        rng = np.random.default_rng(seed)
        n = 12
        X = np.outer(rng.standard_normal(n), rng.standard_normal(q)) if rank_one else rng.standard_normal((n, q))
        X -= X.mean(axis=0)
        T = group_criterion(X)[0]
        bound = np.sum(X.var(axis=0, ddof=1)) * (n - 1) / n**2
        assert T <= bound * (1 + 1e-12)
        if rank_one or q == 1:
            assert T == pytest.approx(bound, rel=1e-10)
        else:
            assert T < bound * (1 - 1e-8)


def test_correlation_top2_matches_correlation_matrix():
    rng = np.random.default_rng(3)
    for shape in [(25, 5), (5, 9)]:
        X = rng.standard_normal(shape)
        R = np.corrcoef(X, rowvar=False)
        ref = _top2_of(R)
        np.testing.assert_allclose(correlation_top2(X), ref, atol=1e-10)


def _top2_of(S):
    w = jacobi_eigh(S)[0]
    return w[0], w[1]
