"""L2-boosting with the variable dendrogram as base-learner.

Each iteration scans every level of the dendrogram for the cluster whose
latent component is most correlated with the current residuals, keeps the
largest of those winners that passes the modified Kaiser-Guttman test, and
adds a shrunken least-squares multiple of its component to the fit. Since
components are linear combinations of their members, the model folds back
into an ordinary coefficient vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .clv import Dendrogram, build_hierarchy, kg_unidimensional
from .errors import DegenerateError, DimensionMismatch, NumericalError
from .preprocess import Dataset, PreprocessParams, ScalingMode, apply_preprocess, fit_preprocess

log = logging.getLogger(__name__)

DEFAULT_NU = 0.5
DEFAULT_M = 50
STOP_RATIO = 1e-10


class Selection(NamedTuple):
    node_id: int
    component: np.ndarray
    correlation: float


@dataclass(frozen=True)
class BoostStep:
    iteration: int
    node_id: int
    members: tuple
    loadings: np.ndarray = field(repr=False)
    alpha: float
    correlation: float
    residual_var_before: float
    residual_var_after: float
    rss_before: float
    rss_after: float

    @property
    def rss_drop(self) -> float:
        return self.rss_before - self.rss_after

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "node_id": self.node_id,
            "members": list(self.members),
            "loadings": self.loadings.tolist(),
            "alpha": self.alpha,
            "correlation": self.correlation,
            "rss_drop": self.rss_drop,
            "rss_before": self.rss_before,
            "rss_after": self.rss_after,
            "residual_var_before": self.residual_var_before,
            "residual_var_after": self.residual_var_after,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BoostStep":
        return cls(
            iteration=int(d["iteration"]),
            node_id=int(d["node_id"]),
            members=tuple(int(j) for j in d["members"]),
            loadings=np.asarray(d["loadings"], dtype=float),
            alpha=float(d["alpha"]),
            correlation=float(d["correlation"]),
            residual_var_before=float(d["residual_var_before"]),
            residual_var_after=float(d["residual_var_after"]),
            rss_before=float(d["rss_before"]),
            rss_after=float(d["rss_after"]),
        )


@dataclass(frozen=True)
class GroupImportance:
    members: tuple
    importance: float
    relative_importance: float
    first_occurrence: int
    occurrences: int
    alpha_sum: float

    def to_dict(self, var_names=None) -> dict:
        d = {
            "members": list(self.members),
            "importance": self.importance,
            "relative_importance": self.relative_importance,
            "first_occurrence": self.first_occurrence,
            "occurrences": self.occurrences,
            "alpha_sum": self.alpha_sum,
        }
        if var_names is not None:
            d["member_names"] = [var_names[j] for j in self.members]
        return d


@dataclass(frozen=True)
class LmClvModel:
    nu: float
    M: int
    steps: tuple
    preprocess: PreprocessParams
    beta_pre: np.ndarray
    beta_raw: np.ndarray
    intercept_raw: float
    y_var: float
    var_names: tuple
    importance: tuple = ()
    dendrogram: Optional[Dendrogram] = field(default=None, repr=False, compare=False)

    @property
    def p(self) -> int:
        return self.beta_raw.shape[0]

    @property
    def selected_variables(self) -> list:
        return sorted({j for s in self.steps for j in s.members})

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "M": self.M,
            **self.preprocess.to_dict(),
            "var_names": list(self.var_names),
            "y_var": self.y_var,
            "steps": [s.to_dict() for s in self.steps],
            "beta_raw": self.beta_raw.tolist(),
            "intercept_raw": self.intercept_raw,
            "importance": [g.to_dict(self.var_names) for g in self.importance],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LmClvModel":
        params = PreprocessParams.from_dict(d)
        steps = tuple(BoostStep.from_dict(s) for s in d["steps"])
        beta_pre = _accumulate(steps, float(d["nu"]), params.p)
        model = cls(
            nu=float(d["nu"]),
            M=int(d["M"]),
            steps=steps,
            preprocess=params,
            beta_pre=beta_pre,
            beta_raw=np.asarray(d["beta_raw"], dtype=float),
            intercept_raw=float(d["intercept_raw"]),
            y_var=float(d["y_var"]),
            var_names=tuple(d["var_names"]),
        )
        return _with_importance(model)


class _LearnerTables:
    """Per-dendrogram arrays reused across boosting iterations."""

    def __init__(self, d: Dendrogram):
        comps = d.components()
        comps = comps - comps.mean(axis=1, keepdims=True)
        self.comps = comps
        self.comp_norms = np.linalg.norm(comps, axis=1)
        self.mask = d.active_mask()
        self.sizes = d.sizes()
        self.kg_pass = np.array([kg_unidimensional(nd, d.p) for nd in d.nodes])
        self.d = d

    def select(self, e: np.ndarray) -> Selection:
        ec = e - e.mean()
        enorm = np.linalg.norm(ec)
        if enorm == 0.0:
            raise DegenerateError("residuals have zero variance")
        r = (self.comps @ ec) / (self.comp_norms * enorm)
        absr = np.abs(r)
        scored = np.where(self.mask, absr[None, :], -1.0)
        winners = set()
        rowmax = scored.max(axis=1)
        for s, best in enumerate(rowmax):
            ties = np.flatnonzero(scored[s] == best)
            if ties.size == 1:
                winners.add(int(ties[0]))
            else:
                # larger group, then smaller node id
                winners.add(int(min(ties, key=lambda k: (-self.sizes[k], k))))
        eligible = [k for k in winners if self.kg_pass[k]]
        best = min(eligible, key=lambda k: (-self.sizes[k], -absr[k], k))
        return Selection(best, self.d.nodes[best].component, float(r[best]))


def base_learner(d: Dendrogram, e) -> Selection:
    """Pick the node whose component is fitted to residuals ``e``.

    Every partition level contributes its node of largest ``|cor(c, e)|``
    (ties: larger group, then smaller id). Among those winners, the largest
    one passing :func:`kg_unidimensional` is returned (ties: larger
    ``|cor|``, then smaller id). Singletons always pass, so a candidate
    always exists.

    Raises
    ------
    DegenerateError
        If ``e`` is constant.
    """
    return _LearnerTables(d).select(np.asarray(e, dtype=float))


def boost_path(X_pre, y_pre, d: Dendrogram, nu: float, M: int) -> list:
    """Run up to ``M`` boosting iterations on preprocessed data; return the steps.

    Stops early once the residual standard deviation falls below
    ``1e-10 * sd(y_pre)``.
    """
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")
    if M < 1:
        raise ValueError(f"M must be at least 1, got {M}")
    X_pre = np.asarray(X_pre, dtype=float)
    e = np.asarray(y_pre, dtype=float).copy()
    n = e.shape[0]
    sd_y = e.std(ddof=1)
    scale = max(sd_y, np.abs(e).max(), 1e-300)
    tables = _LearnerTables(d)
    steps = []
    for m in range(1, M + 1):
        sd_e = e.std(ddof=1)
        if sd_e < STOP_RATIO * sd_y or sd_y == 0.0:
            log.info("residuals exhausted after %d iterations", m - 1)
            break
        if abs(e.mean()) > 1e-8 * scale:
            raise NumericalError("residual mean drifted from zero; predictors must be centered")
        sel = tables.select(e)
        node = d.nodes[sel.node_id]
        c = sel.component
        alpha = float(c @ e)
        rss_before = float(e @ e)
        var_before = float(e.var(ddof=1))
        e = e - nu * alpha * c
        steps.append(
            BoostStep(
                iteration=m,
                node_id=sel.node_id,
                members=node.members,
                loadings=node.loading_values,
                alpha=alpha,
                correlation=sel.correlation,
                residual_var_before=var_before,
                residual_var_after=float(e.var(ddof=1)),
                rss_before=rss_before,
                rss_after=float(e @ e),
            )
        )
    return steps


def _accumulate(steps, nu: float, p: int) -> np.ndarray:
    beta = np.zeros(p)
    for s in steps:
        beta[list(s.members)] += nu * s.alpha * s.loadings
    return beta


def _with_importance(model: LmClvModel) -> LmClvModel:
    groups: dict = {}
    for s in model.steps:
        g = groups.setdefault(s.members, {"imp": 0.0, "first": s.iteration, "occ": 0, "alpha": 0.0})
        g["imp"] += s.residual_var_before - s.residual_var_after
        g["occ"] += 1
        g["alpha"] += s.alpha
    table = tuple(
        GroupImportance(
            members=members,
            importance=g["imp"],
            relative_importance=g["imp"] / model.y_var if model.y_var > 0 else 0.0,
            first_occurrence=g["first"],
            occurrences=g["occ"],
            alpha_sum=g["alpha"],
        )
        for members, g in sorted(groups.items(), key=lambda kv: kv[1]["first"])
    )
    return LmClvModel(**{**model.__dict__, "importance": table})


def _assemble(steps, nu, M, params: PreprocessParams, y_var, var_names, d=None) -> LmClvModel:
    beta_pre = _accumulate(steps, nu, params.p)
    beta_raw = beta_pre / params.divisors
    intercept = params.y_center - float(params.centers @ beta_raw)
    model = LmClvModel(
        nu=nu,
        M=M,
        steps=tuple(steps),
        preprocess=params,
        beta_pre=beta_pre,
        beta_raw=beta_raw,
        intercept_raw=intercept,
        y_var=y_var,
        var_names=tuple(var_names),
        dendrogram=d,
    )
    return _with_importance(model)


def fit(data: Dataset, nu: float = DEFAULT_NU, M: int = DEFAULT_M, mode=ScalingMode.STANDARD,
        dendrogram: Optional[Dendrogram] = None) -> LmClvModel:
    """Preprocess, cluster the predictors once, and boost for up to ``M`` iterations.

    A prebuilt ``dendrogram`` of the preprocessed predictors may be passed to
    skip clustering.
    """
    if M < 1:
        raise ValueError(f"M must be at least 1, got {M}")
    params, X_pre, y_pre = fit_preprocess(data, mode)
    d = build_hierarchy(X_pre) if dendrogram is None else dendrogram
    steps = boost_path(X_pre, y_pre, d, nu, M)
    y_var = float(np.var(data.response, ddof=1))
    return _assemble(steps, nu, M, params, y_var, data.var_names, d)


def _check_width(model: LmClvModel, X_new) -> np.ndarray:
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.shape[1] != model.p:
        raise DimensionMismatch(f"model has {model.p} predictors, data has {X_new.shape[1]}")
    return X_new


def predict(model: LmClvModel, X_new) -> np.ndarray:
    X_new = _check_width(model, X_new)
    return model.intercept_raw + X_new @ model.beta_raw


def predict_components(model: LmClvModel, X_new) -> np.ndarray:
    """Prediction as ``y_center`` plus the sum of shrunken step components."""
    X_pre = apply_preprocess(model.preprocess, _check_width(model, X_new))
    yhat = np.full(X_pre.shape[0], model.preprocess.y_center)
    for s in model.steps:
        yhat += model.nu * s.alpha * (X_pre[:, list(s.members)] @ s.loadings)
    return yhat


def staged_predict(model: LmClvModel, X_new, M: Optional[int] = None) -> np.ndarray:
    """Predictions after 0, 1, ..., ``M`` iterations, shape ``(M + 1, m)``.

    Counts beyond the last fitted step repeat the final prediction.
    """
    M = model.M if M is None else M
    X_pre = apply_preprocess(model.preprocess, _check_width(model, X_new))
    out = np.empty((M + 1, X_pre.shape[0]))
    out[0] = model.preprocess.y_center
    for m in range(1, M + 1):
        out[m] = out[m - 1]
        if m <= len(model.steps):
            s = model.steps[m - 1]
            out[m] += model.nu * s.alpha * (X_pre[:, list(s.members)] @ s.loadings)
    return out


def coefficients(model: LmClvModel, upto: Optional[int] = None):
    """Raw-scale coefficients and intercept after the first ``upto`` steps."""
    if upto is None:
        return model.beta_raw.copy(), model.intercept_raw
    if upto < 0 or upto > model.M:
        raise ValueError(f"upto must lie in 0..{model.M}, got {upto}")
    params = model.preprocess
    beta_raw = _accumulate(model.steps[:upto], model.nu, params.p) / params.divisors
    return beta_raw, params.y_center - float(params.centers @ beta_raw)


def group_importance(model: LmClvModel) -> list:
    """Groups in order of first selection, with summed residual-variance decrease."""
    return list(model.importance)
