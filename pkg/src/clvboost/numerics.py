"""Dense kernels: symmetric eigenpairs, Cholesky, correlation, group criterion.

The production eigen path calls LAPACK (``numpy.linalg.eigh``).
:func:`jacobi_eigh` is a self-contained cyclic Jacobi solver kept as an
independent reference for it.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, NumericalError

SYMMETRY_TOL = 1e-10


class Top2Eig(NamedTuple):
    lambda1: float
    u1: np.ndarray
    lambda2: float


def _as_symmetric(S) -> np.ndarray:
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if S.size and np.max(np.abs(S - S.T)) >= SYMMETRY_TOL * max(1.0, np.max(np.abs(S))):
        raise ValueError("matrix is not symmetric")
    return S


def fix_sign(u: np.ndarray) -> np.ndarray:
    """Flip ``u`` so its largest-magnitude entry is positive (first index wins ties)."""
    k = int(np.argmax(np.abs(u)))
    return -u if u[k] < 0 else u


def sym_eigh(S):
    """Full spectrum of a symmetric matrix, eigenvalues in decreasing order.

    Each eigenvector column is sign-fixed with :func:`fix_sign`.
    """
    S = _as_symmetric(S)
    w, V = np.linalg.eigh(S)
    w, V = w[::-1], V[:, ::-1]
    for j in range(V.shape[1]):
        V[:, j] = fix_sign(V[:, j])
    return w, V


def sym_top2_eig(S) -> Top2Eig:
    """Largest two eigenvalues and the leading unit eigenvector.

    For a 1x1 matrix returns ``(S[0, 0], [1.0], 0.0)``.
    """
    S = _as_symmetric(S)
    q = S.shape[0]
    if q == 1:
        return Top2Eig(float(S[0, 0]), np.ones(1), 0.0)
    w, V = np.linalg.eigh(S)
    if not np.all(np.isfinite(w)):
        raise NumericalError("eigen decomposition produced non-finite values")
    u1 = fix_sign(V[:, -1].copy())
    return Top2Eig(float(w[-1]), u1, float(w[-2]))


def jacobi_eigh(S, max_sweeps: int = 100, tol: float = 1e-12):
    """Cyclic Jacobi eigen decomposition of a symmetric matrix.

    Sweeps over all ``(i, j)`` pairs in row order, annihilating each
    off-diagonal entry with a plane rotation, until the off-diagonal
    Frobenius norm falls below ``tol`` times the Frobenius norm of ``S``.

    Returns
    -------
    w : ndarray
        Eigenvalues in decreasing order.
    V : ndarray
        Orthonormal eigenvectors as columns, sign-fixed.

    Raises
    ------
    NumericalError
        If ``max_sweeps`` sweeps do not reach the tolerance.
    """
    A = _as_symmetric(S).copy()
    q = A.shape[0]
    V = np.eye(q)
    scale = np.linalg.norm(A)
    if scale == 0.0:
        return np.zeros(q), V

    def off_norm():
        return float(np.linalg.norm(A - np.diag(np.diag(A))))

    for _ in range(max_sweeps):
        if off_norm() <= tol * scale:
            break
        for i in range(q - 1):
            for j in range(i + 1, q):
                aij = A[i, j]
                if abs(aij) <= 1e-300:
                    continue
                tau = (A[j, j] - A[i, i]) / (2.0 * aij)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                ai, aj = A[:, i].copy(), A[:, j].copy()
                A[:, i] = c * ai - s * aj
                A[:, j] = s * ai + c * aj
                ri, rj = A[i, :].copy(), A[j, :].copy()
                A[i, :] = c * ri - s * rj
                A[j, :] = s * ri + c * rj
                A[i, j] = A[j, i] = 0.0
                vi, vj = V[:, i].copy(), V[:, j].copy()
                V[:, i] = c * vi - s * vj
                V[:, j] = s * vi + c * vj
    else:
        if off_norm() > tol * scale:
            raise NumericalError(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w, V = w[order], V[:, order]
    for j in range(q):
        V[:, j] = fix_sign(V[:, j])
    return w, V


def cholesky(S) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == S``.

    Raises
    ------
    NumericalError
        "matrix not positive definite" on a non-positive pivot.
    """
    S = _as_symmetric(S)
    q = S.shape[0]
    L = np.zeros_like(S)
    for j in range(q):
        pivot = S[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > 0.0:
            raise NumericalError("matrix not positive definite")
        L[j, j] = math.sqrt(pivot)
        L[j + 1 :, j] = (S[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def pearson_cor(a, b) -> float:
    """Product-moment correlation; raises :class:`DegenerateError` on a constant input."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("vectors differ in length")
    ac, bc = a - a.mean(), b - b.mean()
    na, nb = np.linalg.norm(ac), np.linalg.norm(bc)
    if na == 0.0 or nb == 0.0:
        raise DegenerateError("correlation undefined for a zero-variance vector")
    r = float(ac @ bc / (na * nb))
    return min(1.0, max(-1.0, r))


def _leading_direction(X_G: np.ndarray):
    """Top eigenvalue of ``X_G.T @ X_G`` and its sign-fixed unit eigenvector.

    Works on the smaller of the two cross-product matrices.
    """
    n, q = X_G.shape
    if q <= n:
        lam, u1, _ = sym_top2_eig(X_G.T @ X_G)
    else:
        lam, w, _ = sym_top2_eig(X_G @ X_G.T)
        u1 = X_G.T @ w
        norm = np.linalg.norm(u1)
        if norm == 0.0:
            raise DegenerateError("degenerate group: all-zero block")
        u1 = fix_sign(u1 / norm)
    return lam, u1


def group_criterion(X_G):
    """Criterion value, loadings and latent component of one group of columns.

    Parameters
    ----------
    X_G : ndarray, shape (n, q)
        Centered member columns.

    Returns
    -------
    T : float
        ``lambda1(X_G.T @ X_G) / n**2``, the maximum over unit-norm ``c`` of
        the summed squared covariances (divisor ``n``) between ``c`` and the
        columns.
    v : ndarray, shape (q,)
        Loadings with ``c == X_G @ v``.
    c : ndarray, shape (n,)
        The unit-norm latent component.
    """
    X_G = np.asarray(X_G, dtype=float)
    if X_G.ndim == 1:
        X_G = X_G[:, None]
    n = X_G.shape[0]
    lam, u1 = _leading_direction(X_G)
    xu = X_G @ u1
    norm = float(np.linalg.norm(xu))
    if not norm > 0.0:
        raise DegenerateError("degenerate group: all-zero block")
    return lam / n**2, u1 / norm, xu / norm


def top_eigenvalues(stack: np.ndarray) -> np.ndarray:
    """Largest eigenvalue of each symmetric matrix in a ``(b, q, q)`` stack."""
    return np.linalg.eigvalsh(stack)[..., -1]


def correlation_top2(X_G) -> tuple[float, float]:
    """Two largest eigenvalues of the correlation matrix of the columns of ``X_G``."""
    X_G = np.asarray(X_G, dtype=float)
    if X_G.ndim == 1 or X_G.shape[1] == 1:
        return 1.0, 0.0
    Z = X_G - X_G.mean(axis=0)
    norms = np.linalg.norm(Z, axis=0)
    if np.any(norms == 0.0):
        raise DegenerateError("correlation undefined for a zero-variance column")
    Z = Z / norms
    n, q = Z.shape
    R = Z.T @ Z if q <= n else Z @ Z.T
    w = np.linalg.eigvalsh(R)
    return float(w[-1]), float(w[-2])
