"""Command-line front end.

Subcommands: estimate, shape, rank, gmd, sample, if-curves, are, fre.
Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence
(estimate/shape only, partial JSON still written).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .core import EstimatorConfig, GiniCovError, as_matrix
from .elliptical import EllipticalSpec, draw
from .influence import are_table, if_curve, write_are_csv, write_if_curves_csv
from .m_estimators import duembgen, kotz_m, tr_gini, tyler_m
from .scales import to_shape
from .simulate import (
    ESTIMATOR_NAMES,
    estimate_scatter,
    render_fre_rows,
    run_table2,
    write_fre_csv,
)
from .spatial import gini_mean_difference, multivariate_gmd, spatial_rank

DEFAULT_ARE_CONFIG = {
    "families": [
        {"family": "t", "nu": 5},
        {"family": "t", "nu": 6},
        {"family": "t", "nu": 8},
        {"family": "t", "nu": 15},
        {"family": "normal"},
        {"family": "kotz"},
    ],
    "d": [2, 3, 4, 5],
    "estimators": ["tyler", "duembgen", "kotz-m", "tr-gini", "zonoid"],
    "outer": 10000,
    "inner": 1000,
    "seed": 0,
}

ITERATIVE = ("tr-gini", "kotz-m", "tyler", "duembgen")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read_csv(path) -> np.ndarray:
    """Numeric CSV with an optional single header row (auto-detected)."""
    try:
        with open(path) as fh:
            first = fh.readline()
    except OSError as exc:
        raise GiniCovError(f"cannot read {path}: {exc}") from exc
    if not first.strip():
        raise GiniCovError(f"{path} is empty")
    skip = 0
    try:
        [float(tok) for tok in first.strip().split(",")]
    except ValueError:
        skip = 1
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    except ValueError as exc:
        raise GiniCovError(f"malformed CSV {path}: {exc}") from exc
    if not np.all(np.isfinite(data)):
        raise GiniCovError(f"{path} contains non-finite values")
    return data


def _parse_vector(text: str, d: int, what: str) -> np.ndarray:
    try:
        vec = np.array([float(tok) for tok in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse {what} {text!r}") from exc
    if vec.size != d:
        raise UsageError(f"{what} must have {d} entries, got {vec.size}")
    return vec


def _parse_matrix(text: str, d: int) -> np.ndarray:
    try:
        rows = [[float(tok) for tok in row.split(",")] for row in text.split(";")]
        mat = np.array(rows, dtype=float)
    except ValueError as exc:
        raise UsageError(f"cannot parse matrix {text!r}") from exc
    if mat.shape != (d, d):
        raise UsageError(f"matrix must be {d}x{d}, got {mat.shape}")
    return mat


def _parse_c_convention(text: str):
    if text in ("normal", "none"):
        return text
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"--c-convention must be normal, none, or a number, got {text!r}") from exc


def _emit_json(obj, path):
    payload = json.dumps(obj, indent=2)
    if path is None:
        print(payload)
    else:
        with open(path, "w") as fh:
            fh.write(payload + "\n")


def _matrix_payload(name: str, m: np.ndarray, n: int, iterations: int,
                    residual: float, converged: bool) -> dict:
    return {
        "estimator": name,
        "d": int(m.shape[0]),
        "n": int(n),
        "matrix": [float(v) for v in np.asarray(m).ravel()],
        "iterations": int(iterations),
        "residual": float(residual),
        "converged": bool(converged),
    }


def _run_estimate(args, *, as_shape: bool) -> int:
    data = _read_csv(args.input)
    n, d = data.shape
    location = None
    if args.estimator in ("tyler", "kotz-m"):
        if args.location == "auto":
            raise UsageError(f"{args.estimator} requires an explicit --location")
        location = _parse_vector(args.location, d, "--location")
    config = EstimatorConfig(tolerance=args.tol, max_iter=args.max_iter,
                             c_convention=_parse_c_convention(args.c_convention))
    if args.estimator == "tr-gini":
        rep = tr_gini(data, config)
        m, iters, res, ok = as_matrix(rep.estimate), rep.iterations, rep.final_residual, rep.converged
    elif args.estimator == "kotz-m":
        rep = kotz_m(data, location, config)
        m, iters, res, ok = as_matrix(rep.estimate), rep.iterations, rep.final_residual, rep.converged
    elif args.estimator == "tyler":
        rep = tyler_m(data, location, config)
        m, iters, res, ok = as_matrix(rep.estimate), rep.iterations, rep.final_residual, rep.converged
    elif args.estimator == "duembgen":
        rep = duembgen(data, config)
        m, iters, res, ok = as_matrix(rep.estimate), rep.iterations, rep.final_residual, rep.converged
    else:
        m, ok, iters = estimate_scatter(args.estimator, data, location, config)
        res = 0.0
    if as_shape:
        m = to_shape(m).w
    _emit_json(_matrix_payload(args.estimator, m, n, iters, res, ok), args.output)
    return 0 if ok else 3


def _run_rank(args) -> int:
    data = _read_csv(args.input)
    point = _parse_vector(args.point, data.shape[1], "--point")
    r = spatial_rank(point, data, leave_one_out=args.leave_one_out)
    _emit_json({"d": data.shape[1], "rank": [float(v) for v in r],
                "norm": float(np.linalg.norm(r))}, args.output)
    return 0


def _run_gmd(args) -> int:
    data = _read_csv(args.input)
    n, d = data.shape
    value = gini_mean_difference(data[:, 0]) if d == 1 else multivariate_gmd(data)
    _emit_json({"n": int(n), "d": int(d), "value": float(value)}, args.output)
    return 0


def _build_spec(args) -> EllipticalSpec:
    nu = args.nu
    if args.family == "t":
        if nu is None or nu <= 0:
            raise UsageError("t family needs --nu > 0")
        if nu <= 1:
            print(f"warning: t({nu:g}) has no first moment; pairwise-distance "
                  "estimators are inconsistent for such draws", file=sys.stderr)
    mu = _parse_vector(args.mu, args.d, "--mu") if args.mu else None
    sigma = _parse_matrix(args.sigma, args.d) if args.sigma else None
    try:
        return EllipticalSpec(args.family, args.d, nu=nu, location=mu, scatter=sigma)
    except (ValueError, GiniCovError) as exc:
        raise UsageError(str(exc)) from exc


def _run_sample(args) -> int:
    spec = _build_spec(args)
    rows = draw(spec, args.n, args.seed).data
    out = sys.stdout if args.output is None else open(args.output, "w")
    try:
        for row in rows:
            out.write(",".join(f"{v:.17g}" for v in row) + "\n")
    finally:
        if args.output is not None:
            out.close()
    return 0


def _run_if_curves(args) -> int:
    spec = _build_spec(args)
    estimators = [e.strip() for e in args.estimators.split(",") if e.strip()]
    curves = []
    for i, kind in enumerate(estimators):
        try:
            curves.append(if_curve(kind, spec, args.rmax, args.points,
                                   mc_size=args.mc, seed=args.seed + 1000 * i))
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    write_if_curves_csv(args.output, curves)
    return 0


def _load_json_config(path, defaults: dict) -> dict:
    if path is None:
        return dict(defaults)
    try:
        with open(path) as fh:
            return {**defaults, **json.load(fh)}
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} does not parse: {exc}") from exc


def _run_are(args) -> int:
    cfg = _load_json_config(args.config, DEFAULT_ARE_CONFIG)
    specs = [
        EllipticalSpec(fam["family"], d, nu=fam.get("nu"))
        for d in cfg["d"]
        for fam in cfg["families"]
    ]
    report = are_table(specs, cfg["estimators"], outer=cfg["outer"],
                       inner=cfg["inner"], seed=cfg["seed"])
    print(report.render())
    if args.output:
        write_are_csv(args.output, report)
    return 0


def _run_fre(args) -> int:
    rows = run_table2(args.config, output_csv=args.output, threads=args.threads)
    print(render_fre_rows(rows))
    return 0


def _add_common_spec_flags(p: argparse.ArgumentParser):
    p.add_argument("--family", required=True, choices=["normal", "t", "kotz"])
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--mu", default=None, help="comma-separated location, default 0")
    p.add_argument("--sigma", default=None, help="semicolon-separated rows, default identity")


def build_parser() -> _Parser:
    parser = _Parser(prog="ginicov", description=__doc__)
    parser.add_argument("--version", action="version", version=f"ginicov {__version__}")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap worker threads (compiled kernels and the fre harness)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, as_shape in (("estimate", False), ("shape", True)):
        p = sub.add_parser(name, help=f"{name} scatter from CSV data")
        p.add_argument("--input", required=True)
        p.add_argument("--estimator", required=True, choices=list(ESTIMATOR_NAMES))
        p.add_argument("--location", default="auto")
        p.add_argument("--c-convention", default="normal")
        p.add_argument("--tol", type=float, default=1e-6)
        p.add_argument("--max-iter", type=int, default=100)
        p.add_argument("--output", default=None)
        p.set_defaults(func=lambda a, s=as_shape: _run_estimate(a, as_shape=s))

    p = sub.add_parser("rank", help="spatial rank of a point in a CSV sample")
    p.add_argument("--input", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--leave-one-out", action="store_true")
    p.add_argument("--output", default=None)
    p.set_defaults(func=_run_rank)

    p = sub.add_parser("gmd", help="Gini mean difference (mean pairwise distance)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_run_gmd)

    p = sub.add_parser("sample", help="draw from an elliptical model")
    _add_common_spec_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_run_sample)

    p = sub.add_parser("if-curves", help="tabulate influence curves as CSV")
    _add_common_spec_flags(p)
    p.add_argument("--estimators", default="cov,tyler,kotz-m,tr-gini")
    p.add_argument("--rmax", type=float, default=6.0)
    p.add_argument("--points", type=int, default=61)
    p.add_argument("--mc", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_run_if_curves)

    p = sub.add_parser("are", help="asymptotic relative efficiency table")
    p.add_argument("--config", default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_run_are)

    p = sub.add_parser("fre", help="finite-sample relative efficiency grid")
    p.add_argument("--config", default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=_run_fre)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        import numba

        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    else:
        args.threads = 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ginicov: error: {exc}", file=sys.stderr)
        return 1
    except GiniCovError as exc:
        print(f"ginicov: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
