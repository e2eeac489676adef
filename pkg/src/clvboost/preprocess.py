"""Dataset ingestion, column scaling and cross-validation folds."""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, DimensionMismatch
from .rng import Xoshiro256pp

_ID_HEADERS = {"id", "obs", "obs_id", "sample", ""}
_MISSING_TOKENS = {"", "na", "nan", "null", "none", "?"}


class ScalingMode(str, enum.Enum):
    """How centered predictors are divided before clustering."""

    CENTER = "center"
    STANDARD = "standard"
    PARETO = "pareto"

    @classmethod
    def parse(cls, value) -> "ScalingMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown scaling mode {value!r}; expected one of {choices}") from None


@dataclass(frozen=True)
class Dataset:
    """An ``n x p`` block of predictors with names and an optional response.

    ``strata`` holds optional per-observation labels used only for fold
    allocation; it never enters the model.
    """

    values: np.ndarray
    var_names: tuple
    obs_ids: tuple
    response: Optional[np.ndarray] = None
    strata: Optional[tuple] = None
    response_name: str = "y"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError("predictor block must be two-dimensional")
        n, p = values.shape
        if n < 2:
            raise DataError(f"need at least 2 observations, got {n}")
        if p < 1:
            raise DataError("need at least one predictor")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise DataError(f"non-finite value at row {i + 1}, column {j + 1}")
        names = tuple(str(v) for v in self.var_names)
        if len(names) != p:
            raise DataError(f"{len(names)} variable names for {p} columns")
        if len(set(names)) != p:
            dup = sorted({v for v in names if names.count(v) > 1})
            raise DataError(f"duplicate variable name(s): {', '.join(dup)}")
        ids = tuple(str(v) for v in self.obs_ids)
        if len(ids) != n:
            raise DataError(f"{len(ids)} observation ids for {n} rows")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "var_names", names)
        object.__setattr__(self, "obs_ids", ids)
        if self.response is not None:
            y = np.asarray(self.response, dtype=float).ravel()
            if y.shape[0] != n:
                raise DataError(f"response has {y.shape[0]} entries for {n} rows")
            if not np.all(np.isfinite(y)):
                raise DataError("response contains non-finite values")
            y.setflags(write=False)
            object.__setattr__(self, "response", y)
        if self.strata is not None:
            strata = tuple(str(v) for v in self.strata)
            if len(strata) != n:
                raise DataError(f"strata has {len(strata)} labels for {n} rows")
            object.__setattr__(self, "strata", strata)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            values=self.values[rows],
            var_names=self.var_names,
            obs_ids=tuple(self.obs_ids[i] for i in rows),
            response=None if self.response is None else self.response[rows],
            strata=None if self.strata is None else tuple(self.strata[i] for i in rows),
            response_name=self.response_name,
        )

    def with_response(self, y, name: str = "y") -> "Dataset":
        return Dataset(self.values, self.var_names, self.obs_ids, y, self.strata, name)


def _parse_float(token: str) -> Optional[float]:
    t = token.strip()
    if t.lower() in _MISSING_TOKENS:
        return None
    try:
        v = float(t)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def load_csv(path, response_column: Optional[str] = None, strata_column: Optional[str] = None,
             drop_columns=()) -> Dataset:
    """Read a comma-separated file with a mandatory header row.

    The first column is taken as observation ids when its header is ``id``
    (or empty) or when none of its cells parse as numbers. Every other cell
    must be numeric. ``response_column`` and ``strata_column`` are split off
    the predictor block when named; strata labels may be arbitrary strings.
    Columns named in ``drop_columns`` are ignored entirely.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        rows = [r for r in csv.reader(handle) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i + 2} has {len(r)} cells, header has {len(header)}")
    if len(body) < 2:
        raise DataError(f"{path}: need at least 2 data rows, got {len(body)}")

    drop = set(drop_columns)
    missing = drop - set(header)
    if missing:
        raise DataError(f"{path}: cannot exclude unknown column(s) {sorted(missing)}")
    has_id = header[0] not in (response_column, strata_column, *drop) and (
        header[0].lower() in _ID_HEADERS or all(_parse_float(r[0]) is None for r in body)
    )
    if has_id:
        obs_ids = [r[0].strip() for r in body]
        columns = list(range(1, len(header)))
    else:
        obs_ids = [str(i + 1) for i in range(len(body))]
        columns = list(range(len(header)))

    def locate(name: Optional[str], what: str) -> Optional[int]:
        if name is None:
            return None
        hits = [j for j in columns if header[j] == name]
        if not hits:
            raise DataError(f"{path}: {what} column {name!r} not found")
        return hits[0]

    y_col = locate(response_column, "response")
    s_col = locate(strata_column, "strata")
    strata = [r[s_col].strip() for r in body] if s_col is not None else None
    pred_cols = [j for j in columns if j not in (y_col, s_col) and header[j] not in drop]
    numeric_cols = pred_cols + ([y_col] if y_col is not None else [])

    names = [header[j] for j in pred_cols]
    seen = set()
    for name in names:
        if name in seen:
            raise DataError(f"{path}: duplicate variable name {name!r}")
        seen.add(name)

    block = np.empty((len(body), len(numeric_cols)))
    for i, r in enumerate(body):
        for k, j in enumerate(numeric_cols):
            v = _parse_float(r[j])
            if v is None:
                raise DataError(
                    f"{path}: non-numeric cell {r[j].strip()!r} at row {i + 2}, column {j + 1} ({header[j]!r})"
                )
            block[i, k] = v

    if y_col is not None:
        X, y = block[:, :-1], block[:, -1]
    else:
        X, y = block, None
    if X.shape[1] == 0:
        raise DataError(f"{path}: no predictor columns")
    return Dataset(X, tuple(names), tuple(obs_ids), y, strata, response_column or "y")


def load_vector_csv(path) -> np.ndarray:
    """Read a single-column numeric CSV (optionally preceded by an id column)."""
    ds = load_csv(path)
    if ds.p != 1:
        raise DataError(f"{path}: expected one numeric column, found {ds.p}")
    return ds.values[:, 0].copy()


def write_matrix_csv(path, matrix, names: Sequence[str], ids: Optional[Sequence[str]] = None) -> None:
    """Write a numeric matrix with a header row; ``repr`` floats round-trip exactly."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow((["id"] if ids is not None else []) + list(names))
        for i, row in enumerate(matrix):
            w.writerow(([ids[i]] if ids is not None else []) + [repr(float(v)) for v in row])


@dataclass(frozen=True)
class PreprocessParams:
    """Training-set centers and divisors, reusable on new observations."""

    centers: np.ndarray
    divisors: np.ndarray
    mode: ScalingMode
    y_center: float = 0.0

    @property
    def p(self) -> int:
        return self.centers.shape[0]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "centers": self.centers.tolist(),
            "divisors": self.divisors.tolist(),
            "y_center": float(self.y_center),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessParams":
        return cls(
            centers=np.asarray(d["centers"], dtype=float),
            divisors=np.asarray(d["divisors"], dtype=float),
            mode=ScalingMode.parse(d["mode"]),
            y_center=float(d["y_center"]),
        )


def fit_scaling(data: Dataset, mode=ScalingMode.STANDARD):
    """Center and scale the predictors only; returns ``(params, X_pre)``.

    ``params.y_center`` is 0. Standard deviations use the ``n - 1`` divisor.

    Raises
    ------
    DataError
        If a predictor has zero sample variance.
    """
    mode = ScalingMode.parse(mode)
    X = data.values
    centers = X.mean(axis=0)
    Xc = X - centers
    sd = np.sqrt((Xc**2).sum(axis=0) / (X.shape[0] - 1))
    # relative test so that constant columns with rounding noise are still caught
    bad = np.flatnonzero(sd <= 1e-12 * np.maximum(np.abs(centers), 1.0))
    if bad.size:
        names = ", ".join(data.var_names[j] for j in bad[:5])
        raise DataError(f"zero-variance predictor(s): {names}")
    if mode is ScalingMode.CENTER:
        divisors = np.ones_like(sd)
    elif mode is ScalingMode.STANDARD:
        divisors = sd
    else:
        divisors = np.sqrt(sd)
    return PreprocessParams(centers, divisors, mode), Xc / divisors


def fit_preprocess(data: Dataset, mode=ScalingMode.STANDARD):
    """Scale the predictors as in :func:`fit_scaling` and center the response.

    Returns ``(params, X_pre, y_pre)``; the response is never scaled.
    """
    if data.response is None:
        raise DataError("dataset has no response")
    params, X_pre = fit_scaling(data, mode)
    y_center = float(data.response.mean())
    return replace(params, y_center=y_center), X_pre, data.response - y_center


def apply_preprocess(params: PreprocessParams, X_new) -> np.ndarray:
    X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
    if X_new.shape[1] != params.p:
        raise DimensionMismatch(f"expected {params.p} columns, got {X_new.shape[1]}")
    return (X_new - params.centers) / params.divisors


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    k: int

    def test_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.k)

    def to_json(self) -> str:
        return json.dumps({"k": int(self.k), "fold_of": [int(v) for v in self.fold_of]})

    @classmethod
    def from_json(cls, text: str) -> "FoldAssignment":
        d = json.loads(text)
        return cls(np.asarray(d["fold_of"], dtype=np.int64), int(d["k"]))


def make_folds(n: int, k: int, strata=None, seed: int = 0) -> FoldAssignment:
    """Assign ``n`` observations to ``k`` folds.

    Observations are shuffled with the seeded generator and then dealt
    round-robin. With ``strata`` the deal runs stratum by stratum (labels in
    sorted order), continuing from the fold where the previous stratum ended,
    so per-stratum fold counts differ by at most one and overall sizes stay
    balanced.
    """
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ValueError(f"cannot make {k} folds from {n} observations")
    order = Xoshiro256pp(seed).permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    if strata is None:
        fold_of[order] = np.arange(n) % k
    else:
        labels = [str(s) for s in strata]
        if len(labels) != n:
            raise ValueError(f"strata has {len(labels)} labels for {n} observations")
        start = 0
        for level in sorted(set(labels)):
            members = [i for i in order if labels[i] == level]
            for r, i in enumerate(members):
                fold_of[i] = (start + r) % k
            start = (start + len(members)) % k
    return FoldAssignment(fold_of, k)
