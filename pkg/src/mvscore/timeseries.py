"""Autoregressive fits, residual-bootstrap ensembles and the rolling airline study."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import LinAlgError, solve_toeplitz

from .copula import adjust_copula_observations, copula_energy_score, copula_observation, rank_transform
from .core import (
    EnsembleForecast,
    HistoryTooShort,
    NonFiniteValue,
    SeedSpec,
    SeriesTooShort,
    SingularToeplitz,
)
from .measures import SCORES, dm_or_nan, score_windows
from .multivariate import EnergyEstimatorSpec
from .studies import StudyConfig, StudyResult, dumps_json, parallel_map


@dataclass(frozen=True)
class ArModel:
    phi0: float
    phi: np.ndarray
    residuals: np.ndarray
    sigma2: float

    def __post_init__(self):
        for name in ("phi", "residuals"):
            a = np.array(getattr(self, name), dtype=float, copy=True).ravel()
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.phi.size < 1:
            raise ValueError("an AR model needs order p >= 1")

    @property
    def p(self) -> int:
        return self.phi.size

    def companion(self) -> np.ndarray:
        p = self.p
        c = np.zeros((p, p))
        c[0] = self.phi
        c[1:, :-1] = np.eye(p - 1)
        return c


class DependenceVariant(str, Enum):
    STANDARD = "standard"
    COMONOTONE = "comonotone"
    COUNTERMONOTONE = "countermonotone"


def _series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise NonFiniteValue("series contains NaN or infinite values")
    return x


def autocovariances(x: np.ndarray, p: int) -> np.ndarray:
    """Sample autocovariances at lags 0..p with divisor T."""
    t = x.size
    xc = x - x.mean()
    return np.array([xc[k:] @ xc[: t - k] for k in range(p + 1)]) / t


def fit_ar_yule_walker(series, p: int) -> ArModel:
    """Yule-Walker AR(p) fit; the Toeplitz system is solved by Levinson recursion."""
    x = _series(series)
    t = x.size
    if p < 1:
        raise ValueError("order p must be >= 1")
    if t <= 2 * p:
        raise SeriesTooShort(f"AR({p}) needs more than {2 * p} points, got {t}")
    g = autocovariances(x, p)
    if not g[0] > 0:
        raise SingularToeplitz("series has zero sample variance")
    try:
        phi = solve_toeplitz(g[:p], g[1 : p + 1])
    except LinAlgError as exc:
        raise SingularToeplitz(str(exc)) from None
    if not g[0] - phi @ g[1 : p + 1] > 0:
        raise SingularToeplitz("nonpositive one-step prediction variance")
    mean = x.mean()
    phi0 = mean * (1.0 - phi.sum())
    # lagged design: row t-p holds x[t-1], ..., x[t-p]
    lags = np.column_stack([x[p - k : t - k] for k in range(1, p + 1)])
    resid = x[p:] - phi0 - lags @ phi
    return ArModel(phi0=float(phi0), phi=phi, residuals=resid, sigma2=float(np.mean(resid**2)))


def aic(model: ArModel, t: int) -> float:
    return t * math.log(model.sigma2) + 2 * (model.p + 1)


def select_ar_order_aic(series, p_max: int) -> tuple[int, ArModel]:
    """Order in 1..p_max minimising T ln(sigma2) + 2(p+1); ties go to the smaller order."""
    x = _series(series)
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    if p_max > x.size / 2:
        raise SeriesTooShort(f"p_max={p_max} exceeds half the series length {x.size}")
    best = None
    for p in range(1, p_max + 1):
        model = fit_ar_yule_walker(x, p)
        crit = aic(model, x.size)
        if best is None or crit < best[0]:
            best = (crit, p, model)
    return best[1], best[2]


def residual_quantile(sorted_resid: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Right-continuous empirical quantile: order statistic ceil(u n), at least the first."""
    n = sorted_resid.size
    idx = np.clip(np.ceil(np.asarray(u) * n).astype(np.int64), 1, n) - 1
    return sorted_resid[idx]


def bootstrap_innovations(model: ArModel, h: int, m: int, variant, rng: np.random.Generator) -> np.ndarray:
    variant = DependenceVariant(variant)
    res = model.residuals
    if variant is DependenceVariant.STANDARD:
        return res[rng.integers(0, res.size, size=(m, h))]
    s = np.sort(res)
    u = rng.random(m)
    if variant is DependenceVariant.COMONOTONE:
        return np.repeat(residual_quantile(s, u)[:, None], h, axis=1)
    even = residual_quantile(s, u)
    odd = residual_quantile(s, 1.0 - u)
    out = np.empty((m, h))
    out[:, 0::2] = even[:, None]
    out[:, 1::2] = odd[:, None]
    return out


def _simulate(model: ArModel, hist: np.ndarray, eps: np.ndarray) -> np.ndarray:
    m, h = eps.shape
    p = model.p
    buf = np.empty((m, p + h))
    buf[:, :p] = hist[-p:]
    rev = model.phi[::-1]  # aligns with buf[:, t-p:t] (oldest first)
    for k in range(h):
        t = p + k
        buf[:, t] = model.phi0 + buf[:, t - p : t] @ rev + eps[:, k]
    return buf[:, p:]


def rearrange_paths(values: np.ndarray, variant) -> np.ndarray:
    """Reorder each column so consecutive horizons are co- or countermonotone.

    Column marginals are untouched.  Comonotone sorts every column
    ascending; countermonotone sorts odd horizons ascending and even ones
    descending.
    """
    variant = DependenceVariant(variant)
    x = np.asarray(values, dtype=float)
    if variant is DependenceVariant.STANDARD:
        return x.copy()
    out = np.sort(x, axis=0)
    if variant is DependenceVariant.COUNTERMONOTONE:
        out[:, 1::2] = out[::-1, 1::2]
    return out


SCHEMES = ("innovation", "rearranged")


def bootstrap_forecast_ensemble(
    model: ArModel, history, h: int, m: int, variant, rng: np.random.Generator, scheme: str = "innovation"
) -> EnsembleForecast:
    """M simulated H-step paths of the fitted AR recursion with bootstrapped innovations.

    ``scheme="innovation"`` imposes the dependence variant on the innovations
    (shared or alternating residual ranks within a path).  ``"rearranged"``
    simulates standard paths and rearranges each horizon's values across
    paths, so the marginals equal those of the standard variant.
    """
    hist = _series(history)
    p = model.p
    if hist.size < p:
        raise HistoryTooShort(f"AR({p}) needs {p} past values, got {hist.size}")
    if h < 1 or m < 1:
        raise ValueError("H and M must be positive")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown dependence scheme {scheme!r}")
    if scheme == "rearranged":
        eps = bootstrap_innovations(model, h, m, "standard", rng)
        return EnsembleForecast(rearrange_paths(_simulate(model, hist, eps), variant))
    return EnsembleForecast(_simulate(model, hist, bootstrap_innovations(model, h, m, variant, rng)))


# --- airline study --------------------------------------------------------

AIRLINE_MODELS = tuple(f"AR({o}){suffix}" for suffix in ("", "-M", "-W") for o in ("12", "13", "p"))
_VARIANTS = {"": "standard", "-M": "comonotone", "-W": "countermonotone"}
_CES = EnergyEstimatorSpec(beta=1.0, kind="k_band", k=1)


def airline_windows(t_total: int, t_in: int, horizon: int, shift: int) -> list[int]:
    """Start indices s of the in-sample blocks [s, s+T) whose H-step targets fit in the series."""
    if t_total < t_in + horizon:
        raise SeriesTooShort(f"series of length {t_total} is shorter than T+H = {t_in + horizon}")
    return list(range(0, t_total - t_in - horizon + 1, shift))


def _fit(order: str, block: np.ndarray, max_order: int):
    if order == "p":
        p, model = select_ar_order_aic(block, max_order)
        return p, model
    p = int(order)
    return p, fit_ar_yule_walker(block, p)


def _model_parts(name: str) -> tuple[str, str]:
    base, _, suffix = name.partition(")")
    return base[3:], _VARIANTS[suffix]


def _subset_ces(ensembles: list, obs: list, cols: list, seed: SeedSpec, labels: tuple) -> float:
    cops, u_raw = [], []
    for i, (x, y) in enumerate(zip(ensembles, obs)):
        xs, ys = x[:, cols], y[cols]
        cops.append(rank_transform(xs, seed.stream(*labels, "ties", i)))
        u_raw.append(copula_observation(xs, ys))
    u = adjust_copula_observations(np.array(u_raw), seed.stream(*labels, "adjust"))
    return float(np.mean([copula_energy_score(c, u[i], _CES) for i, c in enumerate(cops)]))


def _run_model(name, series, starts, cfg: StudyConfig, seed: SeedSpec, max_order: int) -> dict:
    order, variant = _model_parts(name)
    t_in, h = cfg.t_in, cfg.horizon
    ensembles, obs, orders = [], [], []
    for i, s in enumerate(starts):
        block = series[s : s + t_in]
        p, model = _fit(order, block, max_order)
        orders.append(p)
        rng = seed.stream("airline", name, i)
        ens = bootstrap_forecast_ensemble(model, block, h, cfg.m, variant, rng, scheme=cfg.scheme)
        ensembles.append(ens.values)
        obs.append(series[s + t_in : s + t_in + h])
    panel = score_windows(zip(ensembles, obs), seed, ("airline", name, "panel"))
    curves = []
    for dim in (2, 3):
        for start in range(h - dim + 1):
            cols = list(range(start, start + dim))
            val = _subset_ces(ensembles, obs, cols, seed, ("airline", name, "curve", dim, start))
            curves.append(("CES", dim, start + 1, val))
    for k in range(h):
        curves.append(("CRPS", 1, k + 1, float(panel.crps_per_h[:, k].mean())))
    return {"panel": panel, "curves": curves, "orders": orders}


def run_airline_study(series, config: StudyConfig, variance: str = "plain") -> StudyResult:
    """Rolling-window AR study with nine models scored by the full measure panel.

    A score whose sample covariance is singular in any window (DSS, CDSS)
    is reported as unavailable for that model: its table cell and the DM
    statistics involving it are NaN.  With co- or countermonotone paths the
    copula sample is collinear, so CDSS is unavailable for those models.
    """
    x = _series(series)
    starts = airline_windows(x.size, config.t_in, config.horizon, config.shift)
    max_order = config.max_order or (config.t_in - 1) // 2
    seed = SeedSpec(config.seed)
    runs = parallel_map(lambda nm: _run_model(nm, x, starts, config, seed, max_order), list(AIRLINE_MODELS), config.threads)
    runs = dict(zip(AIRLINE_MODELS, runs))
    lags = config.horizon // config.shift if variance == "bartlett" else None

    result = StudyResult("airline")
    table = {}
    for nm in AIRLINE_MODELS:
        table[nm] = agg = dict(runs[nm]["panel"].aggregate)
        for s in SCORES:
            result.add(f"model={nm}", s, "mean", agg[s])
    dm, dm_p = {}, {}
    for s in SCORES:
        mat = np.full((len(AIRLINE_MODELS), len(AIRLINE_MODELS)), math.nan)
        pmat = mat.copy()
        for a, na in enumerate(AIRLINE_MODELS):
            for b, nb in enumerate(AIRLINE_MODELS):
                if a == b:
                    continue
                mat[a, b], pmat[a, b] = dm_or_nan(runs[na]["panel"].series[s], runs[nb]["panel"].series[s], variance, lags)
                result.add(f"A={na};B={nb}", s, "dm_stat", mat[a, b])
                result.add(f"A={na};B={nb}", s, "dm_p", pmat[a, b])
        dm[s], dm_p[s] = mat, pmat

    result.summary = {
        "windows": len(starts),
        "window_starts": starts,
        "overlapping": config.shift < config.horizon,
        "dm_variance": variance,
        "dm_lags": lags,
        "aic_orders": runs["AR(p)"]["orders"],
        "scheme": config.scheme,
        "unavailable": {nm: [k for k, v in runs[nm]["panel"].singular.items() if v] for nm in AIRLINE_MODELS},
        "table": table,
    }
    result.extra_files["airline_table.csv"] = _table_csv(table)
    for s in SCORES:
        result.extra_files[f"airline_dm_{s}.csv"] = _matrix_csv(dm[s])
        result.extra_files[f"airline_dm_p_{s}.csv"] = _matrix_csv(dm_p[s])
    result.extra_files["airline_dm.json"] = dumps_json(
        {
            "models": list(AIRLINE_MODELS),
            "statistic": {s: dm[s].tolist() for s in SCORES},
            "p": {s: dm_p[s].tolist() for s in SCORES},
        }
    )
    result.extra_files["airline_curves.csv"] = _curves_csv(runs)
    result.data = {"dm": dm, "dm_p": dm_p, "runs": runs}
    return result


def _cell(v: float) -> str:
    return repr(float(v)) if math.isfinite(v) else ""


def _table_csv(table: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["score", *AIRLINE_MODELS])
    for s in SCORES:
        w.writerow([s, *(_cell(table[nm][s]) for nm in AIRLINE_MODELS)])
    return buf.getvalue()


def _matrix_csv(mat: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["A\\B", *AIRLINE_MODELS])
    for nm, row in zip(AIRLINE_MODELS, mat):
        w.writerow([nm, *(_cell(v) for v in row)])
    return buf.getvalue()


def _curves_csv(runs: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "score", "dim", "start_h", "window_mean"])
    for nm in AIRLINE_MODELS:
        for score, dim, start, val in runs[nm]["curves"]:
            w.writerow([nm, score, dim, start, _cell(val)])
    return buf.getvalue()
