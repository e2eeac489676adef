"""Error metrics, cross-validation harness and latent-component baselines."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .boost import _assemble, boost_path, staged_predict
from .clv import build_hierarchy
from .errors import DataError
from .preprocess import Dataset, FoldAssignment, ScalingMode, apply_preprocess, fit_preprocess

log = logging.getLogger(__name__)


def rmse(y, yhat) -> float:
    y = np.asarray(y, dtype=float).ravel()
    yhat = np.asarray(yhat, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.shape[0]} vs {yhat.shape[0]}")
    if y.size == 0:
        raise ValueError("empty input")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


@dataclass(frozen=True)
class CvCurve:
    """Cross-validated error of one shrinkage value at iteration counts ``0..M``.

    ``rmse_cv`` pools squared errors over all held-out observations;
    ``per_fold_rmse`` keeps each fold separately. ``selections[f][m - 1]``
    is the member tuple chosen at iteration ``m`` in fold ``f``.
    """

    nu: float
    rmse_cv: np.ndarray
    per_fold_rmse: np.ndarray
    selections: tuple = field(default=(), repr=False)

    @property
    def M(self) -> int:
        return self.rmse_cv.shape[0] - 1

    def best(self) -> tuple[int, float]:
        m = int(np.argmin(self.rmse_cv))
        return m, float(self.rmse_cv[m])


def _fold_split(data: Dataset, folds: FoldAssignment, f: int):
    train_idx, test_idx = folds.train_index(f), folds.test_index(f)
    if train_idx.size < 3:
        raise DataError(f"fold {f} leaves only {train_idx.size} training rows")
    # held-out rows stay plain arrays so single-row folds work
    return data.subset(train_idx), data.values[test_idx], data.response[test_idx]


def cross_validate_lmclv(data: Dataset, folds: FoldAssignment, nu_grid: Sequence[float], M: int,
                         mode=ScalingMode.STANDARD) -> list:
    """Cross-validated error curves, one per shrinkage value.

    Each fold is preprocessed and clustered from its training rows alone; the
    dendrogram is shared by all shrinkage values of that fold.
    """
    if data.response is None:
        raise DataError("dataset has no response")
    if folds.fold_of.shape[0] != data.n:
        raise DataError(f"fold assignment covers {folds.fold_of.shape[0]} rows, data has {data.n}")
    nus = [float(v) for v in nu_grid]
    for v in nus:
        if not 0.0 < v <= 1.0:
            raise ValueError(f"nu must lie in (0, 1], got {v}")
    sq = np.zeros((len(nus), M + 1))
    per_fold = np.zeros((len(nus), folds.k, M + 1))
    selections = [[] for _ in nus]
    for f in range(folds.k):
        train, X_test, y_test = _fold_split(data, folds, f)
        params, X_pre, y_pre = fit_preprocess(train, mode)
        d = build_hierarchy(X_pre)
        y_var = float(np.var(train.response, ddof=1))
        for g, nu in enumerate(nus):
            steps = boost_path(X_pre, y_pre, d, nu, M)
            model = _assemble(steps, nu, M, params, y_var, data.var_names)
            err = staged_predict(model, X_test, M) - y_test[None, :]
            sq[g] += (err**2).sum(axis=1)
            per_fold[g, f] = np.sqrt((err**2).mean(axis=1))
            selections[g].append(tuple(s.members for s in steps))
        log.info("fold %d/%d done", f + 1, folds.k)
    return [
        CvCurve(nu, np.sqrt(sq[g] / data.n), per_fold[g], tuple(selections[g]))
        for g, nu in enumerate(nus)
    ]


def cv_rows(curves: Sequence[CvCurve]) -> list:
    """Long-format rows ``(nu, m, fold, rmse)``; ``fold`` is an index or ``"pooled"``."""
    rows = []
    for c in curves:
        for f in range(c.per_fold_rmse.shape[0]):
            for m in range(c.M + 1):
                rows.append((c.nu, m, f, float(c.per_fold_rmse[f, m])))
        for m in range(c.M + 1):
            rows.append((c.nu, m, "pooled", float(c.rmse_cv[m])))
    return rows


def cv_summary(curves: Sequence[CvCurve], var_names=None) -> dict:
    best = min(((c.nu, *c.best()) for c in curves), key=lambda t: (t[2], t[1], t[0]))
    out = {
        "best": {"nu": best[0], "m": best[1], "rmse_cv": best[2]},
        "curves": [{"nu": c.nu, "rmse_cv": c.rmse_cv.tolist()} for c in curves],
    }

    def named(members):
        return [var_names[j] for j in members] if var_names is not None else list(members)

    out["selections"] = [
        {"nu": c.nu, "folds": [[named(m) for m in fold] for fold in c.selections]} for c in curves
    ]
    return out


@dataclass(frozen=True)
class LatentRegression:
    """A PCR or PLS1 fit on preprocessed data.

    ``coefs[a]`` is the coefficient vector using the first ``a``
    components (``coefs[0]`` is zero); ``scores`` holds unit-norm component
    scores as columns.
    """

    method: str
    coefs: np.ndarray
    scores: np.ndarray = field(repr=False)

    @property
    def n_components(self) -> int:
        return self.coefs.shape[0] - 1


@dataclass(frozen=True)
class BaselineResult:
    """Training and cross-validated RMSE by number of components (index 0 = null model)."""

    method: str
    rmse_train: np.ndarray
    rmse_cv: np.ndarray


def _check_components(X, A):
    n, p = X.shape
    limit = min(n - 1, p)
    if not 1 <= A <= limit:
        raise ValueError(f"number of components must lie in 1..{limit}, got {A}")


def pcr_fit(X_pre, y_pre, A: int) -> LatentRegression:
    """Principal components regression with ``1..A`` components.

    Principal axes come from the singular value decomposition of ``X_pre``;
    the scores are orthogonal, so each component's coefficient is a separate
    univariate least-squares fit.
    """
    X = np.asarray(X_pre, dtype=float)
    y = np.asarray(y_pre, dtype=float)
    _check_components(X, A)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    for j in range(Vt.shape[0]):
        k = int(np.argmax(np.abs(Vt[j])))
        if Vt[j, k] < 0:
            U[:, j], Vt[j] = -U[:, j], -Vt[j]
    coefs = np.zeros((A + 1, X.shape[1]))
    tol = s[0] * max(X.shape) * np.finfo(float).eps
    for a in range(A):
        gamma = (U[:, a] @ y) / s[a] if s[a] > tol else 0.0
        coefs[a + 1] = coefs[a] + gamma * Vt[a]
    return LatentRegression("PCR", coefs, U[:, :A].copy())


def pls1_fit(X_pre, y_pre, A: int) -> LatentRegression:
    """Single-response PLS by NIPALS with deflation of ``X`` and ``y``.

    Stops early, returning fewer components, when the weight vector
    vanishes (``X`` exhausted or ``y`` fully explained).
    """
    X = np.asarray(X_pre, dtype=float)
    y = np.asarray(y_pre, dtype=float)
    _check_components(X, A)
    E, f = X.copy(), y.copy()
    W, P, Q, T = [], [], [], []
    w0 = np.linalg.norm(E.T @ f)
    for _ in range(A):
        w = E.T @ f
        nw = np.linalg.norm(w)
        if nw <= 1e-12 * max(w0, 1e-300) or w0 == 0.0:
            break
        w = w / nw
        t = E @ w
        tt = t @ t
        if tt <= 0.0:
            break
        ploads = E.T @ t / tt
        q = (f @ t) / tt
        E -= np.outer(t, ploads)
        f = f - q * t
        W.append(w)
        P.append(ploads)
        Q.append(q)
        T.append(t / np.sqrt(tt))
    k = len(W)
    coefs = np.zeros((k + 1, X.shape[1]))
    if k:
        Wm, Pm, Qv = np.array(W).T, np.array(P).T, np.array(Q)
        for a in range(1, k + 1):
            R = Wm[:, :a] @ np.linalg.inv(Pm[:, :a].T @ Wm[:, :a])
            coefs[a] = R @ Qv[:a]
    scores = np.array(T).T if k else np.zeros((X.shape[0], 0))
    return LatentRegression("PLS1", coefs, scores)


_BASELINES = {"PCR": pcr_fit, "PLS1": pls1_fit}


def _staged_rmse(coefs, X_pre, y_pre, max_a):
    out = np.empty(max_a + 1)
    for a in range(max_a + 1):
        c = coefs[min(a, coefs.shape[0] - 1)]
        out[a] = rmse(y_pre, X_pre @ c)
    return out


def cross_validate_baseline(data: Dataset, folds: FoldAssignment, method: str, A: int,
                            mode=ScalingMode.STANDARD) -> BaselineResult:
    """Training RMSE on the full data and pooled CV RMSE for ``0..A`` components.

    If a fit stops early, higher component counts repeat its last model.
    """
    method = method.upper()
    if method not in _BASELINES:
        raise ValueError(f"unknown baseline {method!r}; expected PCR or PLS1")
    fitter = _BASELINES[method]
    params, X_pre, y_pre = fit_preprocess(data, mode)
    full = fitter(X_pre, y_pre, A)
    rmse_train = _staged_rmse(full.coefs, X_pre, y_pre, A)
    sq = np.zeros(A + 1)
    for f in range(folds.k):
        train, X_test, y_test = _fold_split(data, folds, f)
        tparams, tX, ty = fit_preprocess(train, mode)
        model = fitter(tX, ty, A)
        Xt = apply_preprocess(tparams, X_test)
        for a in range(A + 1):
            c = model.coefs[min(a, model.coefs.shape[0] - 1)]
            sq[a] += np.sum((tparams.y_center + Xt @ c - y_test) ** 2)
    return BaselineResult(method, rmse_train, np.sqrt(sq / data.n))
