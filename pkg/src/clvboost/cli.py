"""Command-line front end.

Every command writes into ``--out`` (a directory) together with a
``manifest.json`` recording parameters, seed, input digests and timing.
Exit codes: 0 success, 2 usage, 3 data validation, 4 model/data mismatch,
5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from contextlib import nullcontext
from pathlib import Path

from . import __version__
from .boost import DEFAULT_M, DEFAULT_NU, LmClvModel, fit, predict
from .clv import build_hierarchy, partition_labels
from .errors import DataError, DimensionMismatch, NumericalError
from .evaluation import cross_validate_lmclv, cv_rows, cv_summary
from .preprocess import (
    Dataset,
    ScalingMode,
    fit_scaling,
    load_csv,
    load_vector_csv,
    make_folds,
    write_matrix_csv,
)
from .simulate import SimulationConfig, simulate

log = logging.getLogger("clvboost")

MANIFEST = "manifest.json"
EXIT_USAGE, EXIT_DATA, EXIT_MISMATCH, EXIT_NUMERIC = 2, 3, 4, 5


class UsageError(Exception):
    pass


def digest(path) -> str:
    """64-bit BLAKE2b content hash, hex encoded."""
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, payload) -> None:
    with path.open("w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _float_list(raw: str) -> list:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {raw!r}") from None


def _name_list(raw: str) -> list:
    return [v.strip() for v in raw.split(",") if v.strip()]


def _int_list(raw: str) -> list:
    try:
        return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from None


class _Run:
    """Collects inputs/outputs of one command and writes its manifest."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"cannot create output directory {self.out}: {exc}") from None
        if not os.access(self.out, os.W_OK):
            raise UsageError(f"output directory {self.out} is not writable")
        self.inputs: dict = {}
        self.outputs: list = []
        self.start = time.perf_counter()

    def input(self, path):
        if path is not None:
            self.inputs[str(path)] = digest(path)
        return path

    def path(self, name: str) -> Path:
        self.outputs.append(name)
        return self.out / name

    def json(self, name: str, payload: dict) -> None:
        _write_json(self.path(name), {**payload, "manifest": MANIFEST})

    def finish(self) -> None:
        params = {
            k: v for k, v in vars(self.args).items() if k not in ("func", "command") and not k.startswith("_")
        }
        _write_json(
            self.out / MANIFEST,
            {
                "command": self.args.command,
                "parameters": params,
                "seed": self.args.seed,
                "inputs": self.inputs,
                "outputs": self.outputs,
                "tool_version": __version__,
                "wall_time_s": round(time.perf_counter() - self.start, 3),
                "created": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            },
        )


def _load_data(run: _Run, args, need_response: bool) -> Dataset:
    strata_col = getattr(args, "strata", None)
    data = load_csv(run.input(args.x), response_column=args.response, strata_column=strata_col,
                    drop_columns=args.exclude or ())
    y_file = getattr(args, "y", None)
    if y_file is not None:
        if args.response is not None:
            raise UsageError("give either --y or --response, not both")
        y = load_vector_csv(run.input(y_file))
        if y.shape[0] != data.n:
            raise DataError(f"{y_file} has {y.shape[0]} rows, {args.x} has {data.n}")
        data = data.with_response(y)
    if need_response and data.response is None:
        raise UsageError("a response is required: pass --y FILE or --response COLUMN")
    return data


def cmd_simulate(args) -> None:
    run = _Run(args)
    groups = args.groups or list(SimulationConfig().group_sizes)
    if not groups or min(groups) < 1:
        raise UsageError(f"bad group sizes {groups}")
    config = SimulationConfig.default_for(
        groups, n=args.n, noise_sd_x=args.noise_x, noise_sd_y=args.noise_y, seed=args.seed
    )
    sim = simulate(config)
    write_matrix_csv(run.path("X.csv"), sim.X, sim.var_names)
    write_matrix_csv(run.path("y.csv"), sim.y[:, None], ["y"])
    run.json(
        "truth.json",
        {
            "config": config.to_dict(),
            "seed": args.seed,
            "allocation": (sim.allocation + 1).tolist(),
            "omega": sim.omega.astype(int).tolist(),
        },
    )
    run.finish()


def cmd_cluster(args) -> None:
    run = _Run(args)
    data = _load_data(run, args, need_response=False)
    ks = args.k or []
    for k in ks:
        if not 1 <= k <= data.p:
            raise UsageError(f"--k values must lie in 1..{data.p}, got {k}")
    _, X_pre = fit_scaling(data, args.scale)
    d = build_hierarchy(X_pre)
    run.json("dendrogram.json", {"scale": args.scale, **d.to_dict(full=args.full, var_names=data.var_names)})
    if ks:
        with run.path("partition.csv").open("w", newline="", encoding="utf-8") as handle:
            w = csv.writer(handle, lineterminator="\n")
            w.writerow(["variable"] + [f"k{k}" for k in ks])
            labels = [partition_labels(d, k) for k in ks]
            for j, name in enumerate(data.var_names):
                w.writerow([name] + [int(lab[j]) for lab in labels])
    run.finish()


def _check_boost_args(nus, M) -> None:
    for nu in nus:
        if not 0.0 < nu <= 1.0:
            raise UsageError(f"--nu must lie in (0, 1], got {nu}")
    if M < 1:
        raise UsageError(f"--M must be at least 1, got {M}")


def cmd_fit(args) -> None:
    _check_boost_args([args.nu], args.M)
    run = _Run(args)
    data = _load_data(run, args, need_response=True)
    model = fit(data, nu=args.nu, M=args.M, mode=args.scale)
    run.json("model.json", model.to_dict())
    run.finish()


def _load_model(run: _Run, path) -> LmClvModel:
    if not Path(path).is_file():
        raise DataError(f"no such model file: {path}")
    try:
        with open(run.input(path), encoding="utf-8") as handle:
            return LmClvModel.from_dict(json.load(handle))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: not a model file ({exc})") from None


def cmd_predict(args) -> None:
    run = _Run(args)
    model = _load_model(run, args.model)
    data = _load_data(run, args, need_response=False)
    if data.p != model.p:
        raise DimensionMismatch(f"model has {model.p} predictors, {args.x} has {data.p}")
    if tuple(data.var_names) != tuple(model.var_names):
        log.warning("column names differ from the model's; matching by position")
    yhat = predict(model, data.values)
    write_matrix_csv(run.path("yhat.csv"), yhat[:, None], ["yhat"], ids=data.obs_ids)
    run.finish()


def cmd_cv(args) -> None:
    _check_boost_args(args.nu, args.M)
    run = _Run(args)
    data = _load_data(run, args, need_response=True)
    if args.strata_file is not None:
        with open(run.input(args.strata_file), newline="", encoding="utf-8") as handle:
            labels = [r[-1].strip() for r in csv.reader(handle) if r][1:]
        if len(labels) != data.n:
            raise DataError(f"{args.strata_file} has {len(labels)} labels for {data.n} rows")
        data = Dataset(data.values, data.var_names, data.obs_ids, data.response, labels)
    if not 2 <= args.k <= data.n:
        raise UsageError(f"--k must lie in 2..{data.n}, got {args.k}")
    folds = make_folds(data.n, args.k, strata=data.strata, seed=args.seed)
    (run.path("folds.json")).write_text(folds.to_json() + "\n", encoding="utf-8")
    curves = cross_validate_lmclv(data, folds, args.nu, args.M, args.scale)
    with run.path("cv_curves.csv").open("w", newline="", encoding="utf-8") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(["nu", "m", "fold", "rmse"])
        for nu, m, fold, value in cv_rows(curves):
            w.writerow([repr(nu), m, fold, repr(value)])
    run.json("cv_summary.json", {"k": args.k, "M": args.M, "scale": args.scale, **cv_summary(curves, data.var_names)})
    run.finish()


def cmd_importance(args) -> None:
    run = _Run(args)
    model = _load_model(run, args.model)
    with run.path("importance.csv").open("w", newline="", encoding="utf-8") as handle:
        w = csv.writer(handle, lineterminator="\n")
        w.writerow(
            ["group", "first_occurrence", "occurrences", "size", "importance",
             "relative_importance", "alpha_sum", "members"]
        )
        for g, imp in enumerate(model.importance, start=1):
            w.writerow(
                [f"G{g}", imp.first_occurrence, imp.occurrences, len(imp.members), repr(imp.importance),
                 repr(imp.relative_importance), repr(imp.alpha_sum),
                 ";".join(model.var_names[j] for j in imp.members)]
            )
    run.finish()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random draw (default 0)")
    common.add_argument("--threads", type=int, default=1, help="cap on BLAS threads (default 1)")
    common.add_argument(
        "--scale", choices=[m.value for m in ScalingMode], default=ScalingMode.STANDARD.value,
        help="predictor scaling: center, standard (default) or pareto",
    )
    common.add_argument("--out", required=True, metavar="DIR", help="output directory")

    data_args = argparse.ArgumentParser(add_help=False)
    data_args.add_argument("--x", required=True, metavar="CSV", help="predictor CSV with header row")
    data_args.add_argument("--response", metavar="COLUMN", help="response column inside --x")
    data_args.add_argument("--exclude", type=_name_list, metavar="COLS", help="comma-separated columns of --x to ignore")

    parser = argparse.ArgumentParser(
        prog="clvboost",
        description="Boosted regression on a dendrogram of variable clusters.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate the grouped toy dataset")
    p.add_argument("--n", type=int, default=100, help="observations (default 100)")
    p.add_argument("--groups", type=_int_list, default=None, help="group sizes (default 35,5,10,10,10)")
    p.add_argument("--noise-x", type=float, default=1.0, help="predictor noise sd (default 1)")
    p.add_argument("--noise-y", type=float, default=1.0, help="response noise sd (default 1)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cluster", parents=[common, data_args], help="build the variable dendrogram")
    p.add_argument("--k", type=_int_list, default=None, help="partition sizes to export, e.g. 3,5")
    p.add_argument("--full", action="store_true", help="include latent components in the JSON")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("fit", parents=[common, data_args], help="fit a model")
    p.add_argument("--y", metavar="CSV", help="response CSV (one column)")
    p.add_argument("--nu", type=float, default=DEFAULT_NU, help=f"shrinkage in (0,1] (default {DEFAULT_NU})")
    p.add_argument("--M", type=int, default=DEFAULT_M, help=f"number of iterations (default {DEFAULT_M})")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common, data_args], help="predict from a model JSON")
    p.add_argument("--model", required=True, metavar="JSON")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", parents=[common, data_args], help="cross-validated error curves")
    p.add_argument("--y", metavar="CSV", help="response CSV (one column)")
    p.add_argument("--nu", type=_float_list, default=[DEFAULT_NU], help="comma-separated shrinkage grid (default 0.5)")
    p.add_argument("--M", type=int, default=20, help="iterations per curve (default 20)")
    p.add_argument("--k", type=int, default=5, help="number of folds (default 5)")
    p.add_argument("--strata", metavar="COLUMN", help="stratification column inside --x")
    p.add_argument("--strata-file", metavar="CSV", help="stratification labels, last column of a CSV")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("importance", parents=[common], help="group importance table of a model")
    p.add_argument("--model", required=True, metavar="JSON")
    p.set_defaults(func=cmd_importance)
    return parser


def _limit_threads(n: int):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        return nullcontext()
    return threadpool_limits(limits=max(1, n))


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("CLVBOOST_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _limit_threads(args.threads):
            args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"clvboost {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DimensionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
