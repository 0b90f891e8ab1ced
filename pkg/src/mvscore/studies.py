"""Synthetic forecast models and the simulation-study harnesses.

Every study is organised as independent tasks (a grid cell, a replication)
whose random streams are derived from hierarchical labels.  Tasks can run
on any number of worker threads; results are collected in task order, so the
output files do not depend on the worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from .core import NoRoot, SeedSpec, UnknownModel
from .measures import SCORES, PanelResult, compare_to_reference, score_windows

# --- generators -----------------------------------------------------------


@dataclass(frozen=True)
class BivariateNormalSpec:
    rho: float = 0.0
    mean: tuple = (0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"correlation must lie in [-1, 1], got {self.rho}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")


def sample_bivariate_normal(spec: BivariateNormalSpec, m: int, rng: np.random.Generator) -> np.ndarray:
    """Rows (Z1, rho Z1 + sqrt(1-rho^2) Z2) * sqrt(scale) + mean; exact on the lines rho = +-1."""
    z = rng.standard_normal((m, 2))
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    if abs(spec.rho) == 1.0:
        x[:, 1] = spec.rho * z[:, 0]
    else:
        x[:, 1] = spec.rho * z[:, 0] + math.sqrt(1.0 - spec.rho**2) * z[:, 1]
    return x * math.sqrt(spec.scale) + np.asarray(spec.mean, dtype=float)


def variance_gap(a: float) -> float:
    """Expected log-likelihood loss of scaling a bivariate covariance by ``a``."""
    return math.log(a) + 1.0 / a - 1.0


def correlation_gap(r: float, rho: float) -> float:
    """Expected log-likelihood loss of forecasting correlation ``r`` when it is ``rho``."""
    return 0.5 * (math.log((1 - r**2) / (1 - rho**2)) + 2 * (1 - r * rho) / (1 - r**2) - 2)


def _root(f: Callable[[float], float], lo: float, hi: float) -> float:
    flo, fhi = f(lo), f(hi)
    if not (np.sign(flo) * np.sign(fhi) < 0):
        raise NoRoot(f"no sign change on [{lo}, {hi}]")
    return bisect(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500)


def solve_study2_constants(delta: float = 0.5 * math.log(2.0), rho: float = math.sqrt(2.0) / 2.0) -> tuple:
    """Distortion sizes (a1..a6) with equal expected likelihood loss ``delta``.

    a1/a2 shift the mean symmetrically/antisymmetrically, a3 < 1 < a4 scale
    the covariance, a5 = 0 and a6 > rho replace the correlation.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not abs(rho) < 1:
        raise ValueError("|rho| must be < 1")
    a1 = math.sqrt(delta * (1.0 + rho))
    a2 = math.sqrt(delta * (1.0 - rho))
    a3 = _root(lambda a: variance_gap(a) - delta, 1e-300, 1.0)
    a4 = _root(lambda a: variance_gap(a) - delta, 1.0, math.exp(delta + 2.0) * 10.0)
    a6 = _root(lambda r: correlation_gap(r, rho) - delta, rho, math.nextafter(1.0, 0.0))
    return (a1, a2, a3, a4, 0.0, a6)


PEAK_MODELS = {
    1: "true",
    2: "average mean",
    3: "zero mean",
    4: "fixed peak",
    5: "rolling peak",
    6: "mixture normal",
    7: "shifted mean",
    8: "normal true moments",
}


@dataclass(frozen=True)
class PeakModelSpec:
    model_id: int
    h: int = 3
    q: float = 5.0

    def __post_init__(self):
        if self.model_id not in PEAK_MODELS:
            raise UnknownModel(f"unknown peak model {self.model_id}")
        if self.h < 2:
            raise ValueError("peak models need H >= 2")


def peak_covariance(h: int, q: float) -> np.ndarray:
    return (h + q**2) / h * np.eye(h) - q**2 / h**2 * np.ones((h, h))


def sample_peak_model(spec: PeakModelSpec, m: int, rng: np.random.Generator, window: int = 1) -> np.ndarray:
    """Draw ``m`` paths from one of the eight peak models.

    ``window`` (1-based) only matters for the rolling-peak model, whose
    peak sits at coordinate 1 + (window-1) mod H.
    """
    h, q, k = spec.h, spec.q, spec.model_id
    if k in (1, 7):
        x = rng.standard_normal((m, h))
        if k == 7:
            x += q / h
        x[np.arange(m), rng.integers(0, h, size=m)] += q
        return x
    if k == 2:
        return rng.standard_normal((m, h)) + q / h
    if k == 3:
        return rng.standard_normal((m, h))
    if k == 4:
        x = rng.standard_normal((m, h))
        x[:, 0] += q
        return x
    if k == 5:
        x = rng.standard_normal((m, h))
        x[:, (window - 1) % h] += q
        return x
    if k == 6:
        x = rng.standard_normal((m, h))
        x += q * (rng.random((m, h)) > (h - 1) / h)
        return x
    chol = np.linalg.cholesky(peak_covariance(h, q))
    return rng.standard_normal((m, h)) @ chol.T + q / h


# --- configuration --------------------------------------------------------

STUDIES = ("sens1", "sens2", "peak", "ensemble-size", "airline")


@dataclass
class StudyConfig:
    """Parameters of a study run.

    Grids are only read by the studies that use them; ``threads`` bounds
    the worker count and never changes results.
    """

    m: int = 2**12
    n: int = 2**7
    l: int = 2**4
    h: int = 3
    q: float = 5.0
    seed: int = 0
    threads: int = 1
    rho_true_grid: tuple = tuple(round(-1.0 + 0.2 * i, 10) for i in range(11))
    rho_fcst_grid: tuple = tuple(round(-1.0 + 0.1 * i, 10) for i in range(21))
    m_grid: tuple = tuple(2**i for i in range(4, 11))
    h_grid: tuple = (3, 9)
    delta: float = 0.5 * math.log(2.0)
    rho: float = math.sqrt(2.0) / 2.0
    # airline
    t_in: int = 60
    horizon: int = 12
    shift: int = 4
    series: Optional[str] = None
    max_order: Optional[int] = None
    scheme: str = "rearranged"

    def validate(self) -> None:
        if self.m < 2:
            raise ValueError("M must be >= 2")
        if self.n < 2:
            raise ValueError("N must be >= 2")
        if self.l < 1:
            raise ValueError("L must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a nonnegative 64-bit integer")
        if any(not -1 <= r <= 1 for r in self.rho_true_grid + self.rho_fcst_grid):
            raise ValueError("correlation grids must lie in [-1, 1]")
        if any(mm < 2 for mm in self.m_grid):
            raise ValueError("ensemble-size grid entries must be >= 2")
        if self.h < 2 or any(hh < 2 for hh in self.h_grid):
            raise ValueError("peak dimension H must be >= 2")
        if self.scheme not in ("innovation", "rearranged"):
            raise ValueError(f"unknown dependence scheme {self.scheme!r}")
        if self.t_in < 2 or self.horizon < 1 or self.shift < 1:
            raise ValueError("airline windows need T >= 2, H >= 1 and shift >= 1")

    def result_params(self, study: str) -> dict:
        """The parameters that determine a study's output (excludes ``threads``)."""
        keys = {
            "sens1": ("m", "n", "seed", "rho_true_grid", "rho_fcst_grid"),
            "sens2": ("m", "n", "l", "seed", "delta", "rho"),
            "peak": ("m", "n", "l", "h", "q", "seed"),
            "ensemble-size": ("n", "l", "q", "seed", "m_grid", "h_grid"),
            "airline": ("m", "seed", "t_in", "horizon", "shift", "max_order", "scheme"),
        }[study]
        d = asdict(self)
        return {k: list(d[k]) if isinstance(d[k], tuple) else d[k] for k in keys}


DESK = {
    "sens1": dict(m=2**12, n=2**7),
    "sens2": dict(m=2**12, n=2**7, l=2**4),
    "peak": dict(m=2**12, n=2**5, l=2**4, h=3, q=5.0),
    "ensemble-size": dict(n=2**4, l=2**3, q=5.0, m_grid=tuple(2**i for i in range(4, 11)), h_grid=(3, 9)),
    "airline": dict(m=2**12),
}

FULL = {
    "sens1": dict(m=2**14, n=2**9),
    "sens2": dict(m=2**13, n=2**8, l=2**6),
    "peak": dict(m=2**14, n=2**5, l=2**6, h=3, q=5.0),
    "ensemble-size": dict(n=2**4, l=2**7, q=5.0, m_grid=tuple(2**i for i in range(4, 15)), h_grid=(3, 9)),
    "airline": dict(m=2**16),
}


def study_config(study: str, scale: str = "desk", **overrides) -> StudyConfig:
    if study not in STUDIES:
        raise ValueError(f"unknown study {study!r}")
    base = (DESK if scale == "desk" else FULL)[study]
    cfg = replace(StudyConfig(), **base)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    cfg.validate()
    return cfg


# --- execution helpers ----------------------------------------------------


def parallel_map(fn: Callable, tasks: Sequence, threads: int = 1) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def five_numbers(values: Iterable[float]) -> dict:
    v = np.asarray([x for x in values if math.isfinite(x)], dtype=float)
    if v.size == 0:
        return {k: math.nan for k in ("min", "q1", "median", "q3", "max", "mean")}
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
    return {"min": q[0], "q1": q[1], "median": q[2], "q3": q[3], "max": q[4], "mean": float(v.mean())}


@dataclass
class StudyResult:
    study: str
    rows: list = field(default_factory=list)  # (cell, score, metric, value)
    summary: dict = field(default_factory=dict)
    extra_files: dict = field(default_factory=dict)  # filename -> text
    data: dict = field(default_factory=dict)  # in-memory artefacts, not written

    def add(self, cell: str, score: str, metric: str, value: float) -> None:
        self.rows.append((cell, score, metric, float(value)))

    def lookup(self, cell: str, score: str, metric: str) -> float:
        for c, s, m, v in self.rows:
            if (c, s, m) == (cell, score, metric):
                return v
        raise KeyError((cell, score, metric))


def _fmt(v: float) -> str:
    return "" if not math.isfinite(v) else repr(float(v))


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_result(result: StudyResult, outdir, config: StudyConfig) -> list[Path]:
    """Write ``<study>.csv`` (tidy rows), ``<study>_summary.json`` and any extra files."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = result.study.replace("-", "_")
    paths = []
    p = outdir / f"{stem}.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["study", "cell", "score", "metric", "value"])
        for cell, score, metric, value in result.rows:
            w.writerow([result.study, cell, score, metric, _fmt(value)])
    paths.append(p)
    p = outdir / f"{stem}_summary.json"
    p.write_text(dumps_json({"study": result.study, "params": config.result_params(result.study), "summary": result.summary}))
    paths.append(p)
    for name, text in result.extra_files.items():
        p = outdir / name
        p.write_text(text)
        paths.append(p)
    return paths


def _panel(seed: SeedSpec, labels: tuple, n: int, obs: list, draw: Callable[[int, np.random.Generator], np.ndarray]) -> PanelResult:
    pairs = ((draw(i, seed.stream(*labels, "ens", i)), obs[i]) for i in range(n))
    return score_windows(pairs, seed, labels)


def _emit(result: StudyResult, cell: str, cmp: dict, metrics=("relch", "dm_stat", "dm_p")) -> None:
    for s in SCORES:
        for metric in metrics:
            result.add(cell, s, metric, cmp[s][metric])


def _emit_distribution(result: StudyResult, cell: str, per_rep: list[dict]) -> dict:
    out = {}
    for s in SCORES:
        out[s] = {}
        for metric in ("relch", "dm_stat"):
            stats = five_numbers(r[s][metric] for r in per_rep)
            out[s][metric] = stats
            for k, v in stats.items():
                result.add(cell, s, f"{metric}_{k}", v)
    return out


# --- sensitivity study I --------------------------------------------------


def run_sensitivity_study_1(config: StudyConfig) -> StudyResult:
    """True vs forecast correlation grid for the bivariate normal.

    For each true correlation, N observations are drawn once and shared by
    the reference (true-model) ensemble and every forecast correlation.
    """
    seed = SeedSpec(config.seed)
    m, n = config.m, config.n
    true_grid, fcst_grid = config.rho_true_grid, config.rho_fcst_grid

    def observations(a: int) -> list:
        spec = BivariateNormalSpec(true_grid[a])
        return [sample_bivariate_normal(spec, 1, seed.stream("sens1", "obs", a, i))[0] for i in range(n)]

    obs = [observations(a) for a in range(len(true_grid))]

    def task(key):
        a, b = key
        rho = true_grid[a] if b < 0 else fcst_grid[b]
        spec = BivariateNormalSpec(rho)
        labels = ("sens1", "model", a, "ref" if b < 0 else b)
        return _panel(seed, labels, n, obs[a], lambda i, rng: sample_bivariate_normal(spec, m, rng))

    refs = parallel_map(task, [(a, -1) for a in range(len(true_grid))], config.threads)
    keys = [(a, b) for a in range(len(true_grid)) for b in range(len(fcst_grid))]
    panels = parallel_map(task, keys, config.threads)

    result = StudyResult("sens1")
    for (a, b), panel in zip(keys, panels):
        cell = f"rho_true={true_grid[a]:g};rho_fcst={fcst_grid[b]:g}"
        cmp = compare_to_reference(panel, refs[a])
        _emit(result, cell, cmp)
        result.summary.setdefault(f"rho_true={true_grid[a]:g}", {})[f"rho_fcst={fcst_grid[b]:g}"] = {
            s: {"dm_stat": cmp[s]["dm_stat"], "relch": cmp[s]["relch"]} for s in SCORES
        }
    return result


# --- sensitivity study II -------------------------------------------------

SENS2_SETTINGS = ("true", "mean sym", "mean asym", "var smaller", "var larger", "cor smaller", "cor larger")


def sens2_specs(delta: float, rho: float) -> dict:
    a1, a2, a3, a4, a5, a6 = solve_study2_constants(delta, rho)
    return {
        "true": BivariateNormalSpec(rho),
        "mean sym": BivariateNormalSpec(rho, mean=(a1, a1)),
        "mean asym": BivariateNormalSpec(rho, mean=(a2, -a2)),
        "var smaller": BivariateNormalSpec(rho, scale=a3),
        "var larger": BivariateNormalSpec(rho, scale=a4),
        "cor smaller": BivariateNormalSpec(a5),
        "cor larger": BivariateNormalSpec(a6),
    }


def run_sensitivity_study_2(config: StudyConfig) -> StudyResult:
    """Seven equally likelihood-distant settings, L replications of N windows each."""
    seed = SeedSpec(config.seed)
    m, n = config.m, config.n
    specs = sens2_specs(config.delta, config.rho)

    def replication(rep: int) -> dict:
        true = specs["true"]
        obs = [sample_bivariate_normal(true, 1, seed.stream("sens2", "obs", rep, i))[0] for i in range(n)]
        ref = _panel(seed, ("sens2", rep, "ref"), n, obs, lambda i, rng: sample_bivariate_normal(true, m, rng))
        out = {}
        for name in SENS2_SETTINGS:
            spec = specs[name]
            panel = _panel(seed, ("sens2", rep, name), n, obs, lambda i, rng, spec=spec: sample_bivariate_normal(spec, m, rng))
            out[name] = compare_to_reference(panel, ref)
        return out

    reps = parallel_map(replication, list(range(config.l)), config.threads)
    result = StudyResult("sens2")
    result.summary["constants"] = dict(zip(("a1", "a2", "a3", "a4", "a5", "a6"), solve_study2_constants(config.delta, config.rho)))
    for name in SENS2_SETTINGS:
        result.summary[name] = _emit_distribution(result, f"setting={name}", [r[name] for r in reps])
    return result


# --- random peak study ----------------------------------------------------


def _peak_replication(seed: SeedSpec, tag: str, rep: int, m: int, n: int, h: int, q: float) -> dict:
    true = PeakModelSpec(1, h, q)
    obs = [sample_peak_model(true, 1, seed.stream(tag, "obs", rep, i), window=i + 1)[0] for i in range(n)]
    ref = _panel(seed, (tag, rep, "ref"), n, obs, lambda i, rng: sample_peak_model(true, m, rng, window=i + 1))
    out = {}
    for k in range(2, 9):
        spec = PeakModelSpec(k, h, q)
        panel = _panel(seed, (tag, rep, k), n, obs, lambda i, rng, spec=spec: sample_peak_model(spec, m, rng, window=i + 1))
        out[k] = compare_to_reference(panel, ref)
    return out


def run_random_peak_study(config: StudyConfig) -> StudyResult:
    """DM statistics of models 2-8 against the true peak model over L replications."""
    seed = SeedSpec(config.seed)
    reps = parallel_map(
        lambda rep: _peak_replication(seed, "peak", rep, config.m, config.n, config.h, config.q),
        list(range(config.l)),
        config.threads,
    )
    result = StudyResult("peak")
    for k in range(2, 9):
        result.summary[f"model={k} ({PEAK_MODELS[k]})"] = _emit_distribution(result, f"model={k}", [r[k] for r in reps])
    return result


def run_ensemble_size_study(config: StudyConfig) -> StudyResult:
    """Mean DM statistic of the peak study per (H, M, model, score)."""
    seed = SeedSpec(config.seed)
    keys = [(h, m, rep) for h in config.h_grid for m in config.m_grid for rep in range(config.l)]

    def task(key):
        h, m, rep = key
        return _peak_replication(seed, f"ensemble-size/H={h}/M={m}", rep, m, config.n, h, config.q)

    outs = dict(zip(keys, parallel_map(task, keys, config.threads)))
    result = StudyResult("ensemble-size")
    for h in config.h_grid:
        for m in config.m_grid:
            for k in range(2, 9):
                cell = f"H={h};M={m};model={k}"
                for s in SCORES:
                    vals = [outs[(h, m, rep)][k][s]["dm_stat"] for rep in range(config.l)]
                    finite = [v for v in vals if math.isfinite(v)]
                    mean = float(np.mean(finite)) if finite else math.nan
                    result.add(cell, s, "dm_stat_mean", mean)
                    result.summary.setdefault(f"H={h}", {}).setdefault(f"model={k}", {}).setdefault(s, {})[str(m)] = mean
    return result
