"""The nine-measure scoring panel applied to every model in a rolling-window study."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .combine import combine_marginal_copula
from .copula import (
    adjust_copula_observations,
    copula_dss,
    copula_energy_score,
    copula_observation,
    copula_variogram_score,
    rank_transform,
)
from .core import SampleTooSmall, SeedSpec, SingularCovariance, ZeroVarianceDifferences
from .evaluation import dm_test
from .multivariate import EnergyEstimatorSpec, dawid_sebastiani_score, energy_score, variogram_score
from .univariate import crps_per_horizon

SCORES = ("ES", "VS", "DSS", "CRPS-CES", "CRPS-CVS", "CRPS", "CES", "CVS", "CDSS")
COMBINED = {"CRPS-CES": "CES", "CRPS-CVS": "CVS"}

_ES_SPEC = EnergyEstimatorSpec(beta=1.0, kind="k_band", k=1)


def _or_nan(fn, *args) -> float:
    try:
        return fn(*args)
    except (SingularCovariance, SampleTooSmall):
        return math.nan


@dataclass
class PanelResult:
    """Per-window series (NaN where a score is undefined) and study-level values."""

    series: dict
    aggregate: dict
    crps_per_h: np.ndarray
    copulas: Optional[list] = None
    u_adjusted: Optional[np.ndarray] = None
    singular: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.crps_per_h.shape[0]


def score_windows(pairs: Iterable, seed: SeedSpec, labels: tuple = (), keep_copulas: bool = False) -> PanelResult:
    """Score one model over all windows of a study.

    ``pairs`` yields ``(ensemble, observation)`` per window in time order.
    Ties in the rank transforms and in the copula-observation adjustment
    are broken with streams derived from ``labels``, so the result is a pure
    function of the inputs and the seed.
    """
    es, vs, dss, crps_h, u_raw, cops = [], [], [], [], [], []
    for i, (x, y) in enumerate(pairs):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        es.append(energy_score(x, y, _ES_SPEC))
        vs.append(variogram_score(x, y, None, 1.0))
        dss.append(_or_nan(dawid_sebastiani_score, x, y))
        crps_h.append(crps_per_horizon(x, y))
        u_raw.append(copula_observation(x, y))
        cops.append(rank_transform(x, seed.stream(*labels, "ties", i)))
    n = len(es)
    u_star = adjust_copula_observations(np.array(u_raw), seed.stream(*labels, "adjust"))
    ces = np.array([copula_energy_score(cops[i], u_star[i], _ES_SPEC) for i in range(n)])
    cvs = np.array([copula_variogram_score(cops[i], u_star[i], None, 1.0) for i in range(n)])
    cdss = np.array([_or_nan(copula_dss, cops[i], u_star[i]) for i in range(n)])
    crps_h = np.array(crps_h)
    crps = crps_h.mean(axis=1)

    series = {
        "ES": np.array(es),
        "VS": np.array(vs),
        "DSS": np.array(dss),
        "CRPS": crps,
        "CES": ces,
        "CVS": cvs,
        "CDSS": cdss,
    }
    aggregate = {k: float(np.mean(v)) for k, v in series.items()}
    for name, cs in COMBINED.items():
        rep = combine_marginal_copula(crps, series[cs])
        series[name] = rep.per_window
        aggregate[name] = rep.aggregate
    series = {k: series[k] for k in SCORES}
    aggregate = {k: aggregate[k] for k in SCORES}
    singular = {k: bool(np.any(np.isnan(series[k]))) for k in ("DSS", "CDSS")}
    return PanelResult(
        series=series,
        aggregate=aggregate,
        crps_per_h=crps_h,
        copulas=cops if keep_copulas else None,
        u_adjusted=u_star,
        singular=singular,
    )


def dm_or_nan(a: np.ndarray, b: np.ndarray, variance: str = "plain", lags: Optional[int] = None) -> tuple[float, float]:
    """DM statistic and p for loss series A vs B, NaN when undefined."""
    if np.any(np.isnan(a)) or np.any(np.isnan(b)):
        return math.nan, math.nan
    try:
        r = dm_test(a, b, variance=variance, lags=lags)
    except ZeroVarianceDifferences:
        return math.nan, math.nan
    return r.statistic, r.p_one_sided


def relch_or_nan(value: float, reference: float) -> float:
    if not (math.isfinite(value) and math.isfinite(reference)) or reference == 0:
        return math.nan
    return (value - reference) / reference


def compare_to_reference(panel: PanelResult, reference: PanelResult) -> dict:
    """Per-score RelCh and DM statistic of ``panel`` against ``reference``."""
    out = {}
    for s in SCORES:
        stat, p = dm_or_nan(panel.series[s], reference.series[s])
        out[s] = {
            "relch": relch_or_nan(panel.aggregate[s], reference.aggregate[s]),
            "dm_stat": stat,
            "dm_p": p,
        }
    return out


__all__ = ["SCORES", "PanelResult", "score_windows", "dm_or_nan", "relch_or_nan", "compare_to_reference"]
