"""Command-line entry point: ``mvscore score|dm|study|constants``."""

from __future__ import annotations

import argparse
import dataclasses
import importlib.resources
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .copula import copula_dss, copula_energy_score, copula_observation, copula_variogram_score, rank_transform
from .core import (
    ScoreError,
    SeedSpec,
    SingularCovariance,
    read_ensemble_csv,
    read_observation_csv,
    read_series_csv,
)
from .evaluation import dm_test
from .multivariate import EnergyEstimatorSpec, dawid_sebastiani_score, energy_score, variogram_score
from .studies import (
    STUDIES,
    StudyConfig,
    dumps_json,
    run_ensemble_size_study,
    run_random_peak_study,
    run_sensitivity_study_1,
    run_sensitivity_study_2,
    solve_study2_constants,
    study_config,
    write_result,
)
from .univariate import crps_per_horizon, marginal_score

OUT_ENV = "MVSCORE_OUT"
SCORE_NAMES = ("ES", "VS", "DSS", "CRPS", "CES", "CVS", "CDSS", "CRPS-CES", "CRPS-CVS")


class UsageError(Exception):
    """Bad input detected before any computation (exit status 2)."""


def default_series_path() -> Path:
    return Path(str(importlib.resources.files("mvscore") / "data" / "airpassengers.csv"))


# --- config files ---------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(StudyConfig)}


def _coerce(name: str, raw: str):
    default = getattr(StudyConfig(), name)
    if isinstance(default, tuple):
        return tuple(float(v) if "." in v or "e" in v.lower() else int(v) for v in raw.split(",") if v.strip())
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, tuples are comma separated."""
    path = Path(path)
    out = {}
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"{path}: cannot read config ({exc.strerror})") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {lineno}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELDS:
            raise UsageError(f"{path}: line {lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, val)
        except ValueError:
            raise UsageError(f"{path}: line {lineno}: bad value {val!r} for {key}") from None
    return out


# --- subcommands ----------------------------------------------------------


def _single_window_scores(args) -> dict:
    ens = read_ensemble_csv(args.ensemble)
    obs = read_observation_csv(args.obs)
    x, y = ens.values, obs.y
    if x.shape[1] != y.shape[0]:
        raise UsageError(f"{args.obs}: observation has {y.shape[0]} values but {args.ensemble} has {x.shape[1]} columns")
    w = None
    if args.weights:
        w = read_ensemble_csv(args.weights).values
    spec = EnergyEstimatorSpec(beta=args.beta, kind=args.estimator, k=args.k)
    spec.check(x.shape[0])
    wanted = args.scores or list(SCORE_NAMES)
    out = {}
    cop = u = None
    if any(s in ("CES", "CVS", "CDSS", "CRPS-CES", "CRPS-CVS") for s in wanted):
        cop = rank_transform(x, SeedSpec(args.seed).stream("score", "ties"))
        u = copula_observation(x, y)
    crps = marginal_score(crps_per_horizon(x, y))

    def guarded(fn, *a):
        try:
            return fn(*a)
        except SingularCovariance:
            return math.nan

    ces_spec = dataclasses.replace(spec, beta=1.0)
    for s in wanted:
        if s == "ES":
            out[s] = energy_score(x, y, spec)
        elif s == "VS":
            out[s] = variogram_score(x, y, w, args.p)
        elif s == "DSS":
            out[s] = guarded(dawid_sebastiani_score, x, y)
        elif s == "CRPS":
            out[s] = crps
        elif s == "CES":
            out[s] = copula_energy_score(cop, u, ces_spec)
        elif s == "CVS":
            out[s] = copula_variogram_score(cop, u, w, args.p)
        elif s == "CDSS":
            out[s] = guarded(copula_dss, cop, u)
        elif s == "CRPS-CES":
            out[s] = crps * copula_energy_score(cop, u, ces_spec)
        elif s == "CRPS-CVS":
            out[s] = crps * copula_variogram_score(cop, u, w, args.p)
    return out


def cmd_score(args) -> int:
    out = _single_window_scores(args)
    sys.stdout.write(dumps_json({"scores": out}))
    return 0


def cmd_dm(args) -> int:
    a = read_series_csv(args.a)
    b = read_series_csv(args.b)
    if a.size != b.size:
        raise UsageError(f"{args.b}: {b.size} values, but {args.a} has {a.size}")
    r = dm_test(a, b, variance=args.variance, lags=args.lags)
    sys.stdout.write(dumps_json(r.as_dict()))
    return 0


def cmd_constants(args) -> int:
    vals = solve_study2_constants(args.delta, args.rho)
    for i, v in enumerate(vals, start=1):
        print(f"a{i} = {v:.10f}")
    return 0


_RUNNERS = {
    "sens1": run_sensitivity_study_1,
    "sens2": run_sensitivity_study_2,
    "peak": run_random_peak_study,
    "ensemble-size": run_ensemble_size_study,
}


def build_study_config(args) -> StudyConfig:
    overrides = {}
    if args.config:
        overrides.update(read_config_file(args.config))
    for name in ("m", "n", "l", "h", "q", "seed", "threads", "t_in", "horizon", "shift", "max_order", "scheme"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    for name in ("m_grid", "h_grid", "rho_true_grid", "rho_fcst_grid"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = _coerce(name, v)
    try:
        return study_config(args.name, "paper" if args.paper_scale else "desk", **overrides)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid study configuration: {exc}") from None


def cmd_study(args) -> int:
    cfg = build_study_config(args)
    outdir = Path(args.out or os.environ.get(OUT_ENV) or "results")
    if args.paper_scale:
        print(f"warning: paper-scale {args.name} run; this can take hours", file=sys.stderr)
    if args.name == "airline":
        from .timeseries import run_airline_study

        series_path = Path(args.series) if args.series else default_series_path()
        series = read_series_csv(series_path)
        result = run_airline_study(series, cfg, variance=args.variance)
    else:
        result = _RUNNERS[args.name](cfg)
    paths = write_result(result, outdir, cfg)
    manifest = {
        "study": args.name,
        "scale": "paper" if args.paper_scale else "desk",
        "threads": cfg.threads,
        "params": cfg.result_params(args.name),
        "outputs": [str(p) for p in paths],
    }
    sys.stdout.write(dumps_json(manifest))
    return 0


# --- parser ---------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvscore", description="Multivariate scoring rules for ensemble forecasts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score one ensemble against one observation")
    p.add_argument("--ensemble", required=True, help="CSV, one path per row (M x H)")
    p.add_argument("--obs", required=True, help="CSV with a single row of H values")
    p.add_argument("--scores", nargs="+", choices=SCORE_NAMES)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--estimator", choices=("k_band", "iid_split"), default="k_band")
    p.add_argument("--k", type=_positive_int, default=1, help="band width of the k_band estimator")
    p.add_argument("--p", type=float, default=1.0, help="variogram order")
    p.add_argument("--weights", help="CSV with an H x H variogram weight matrix")
    p.add_argument("--seed", type=int, default=0, help="seed for rank tie-breaking")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("dm", help="Diebold-Mariano test of two loss series")
    p.add_argument("a", help="CSV loss series of model A (one value per line)")
    p.add_argument("b", help="CSV loss series of model B")
    p.add_argument("--variance", choices=("plain", "bartlett"), default="plain")
    p.add_argument("--lags", type=int)
    p.set_defaults(func=cmd_dm)

    p = sub.add_parser("constants", help="print the likelihood-matched distortion sizes a1..a6")
    p.add_argument("--delta", type=float, default=0.5 * math.log(2.0))
    p.add_argument("--rho", type=float, default=math.sqrt(2.0) / 2.0)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("study", help="run a simulation or airline study")
    p.add_argument("name", choices=STUDIES)
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--desk-scale", action="store_true", help="small default sizes (default)")
    scale.add_argument("--paper-scale", action="store_true", help="full-size settings; slow")
    p.add_argument("--config", help="flat key = value file with study parameters")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./results)")
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--m", type=_positive_int, help="ensemble size M")
    p.add_argument("--n", type=_positive_int, help="windows per replication N")
    p.add_argument("--l", type=_positive_int, help="replications L")
    p.add_argument("--h", type=_positive_int, help="peak-study dimension H")
    p.add_argument("--q", type=float, help="peak size Q")
    p.add_argument("--m-grid", dest="m_grid", help="comma separated ensemble sizes")
    p.add_argument("--h-grid", dest="h_grid", help="comma separated dimensions")
    p.add_argument("--rho-true-grid", dest="rho_true_grid")
    p.add_argument("--rho-fcst-grid", dest="rho_fcst_grid")
    p.add_argument("--series", help="airline: univariate series CSV (default: bundled passenger data)")
    p.add_argument("--t-in", dest="t_in", type=_positive_int, help="airline: in-sample length T")
    p.add_argument("--horizon", type=_positive_int, help="airline: forecast horizon H")
    p.add_argument("--shift", type=_positive_int, help="airline: window shift")
    p.add_argument("--max-order", dest="max_order", type=_positive_int, help="airline: largest AIC order")
    p.add_argument("--scheme", choices=("rearranged", "innovation"), help="airline: how -M/-W dependence is imposed")
    p.add_argument("--variance", choices=("plain", "bartlett"), default="plain", help="airline: DM variance estimator")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mvscore: error: {exc}", file=sys.stderr)
        return 2
    except (ScoreError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"mvscore: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"mvscore: runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
