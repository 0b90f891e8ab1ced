"""Score averages, relative change and the Diebold-Mariano test."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import EmptySeries, LengthMismatch, DegenerateSeries, NonFiniteValue, ZeroReferenceMean, ZeroVarianceDifferences


@dataclass(frozen=True)
class ScoreSeries:
    values: np.ndarray
    model: str = ""
    score: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float, copy=True).ravel()
        if not np.all(np.isfinite(v)):
            raise NonFiniteValue(f"score series {self.model}/{self.score} has non-finite entries")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_one_sided: float
    n: int
    mean_diff: float
    sd_mean_diff: float

    def as_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p": self.p_one_sided,
            "n": self.n,
            "mean_diff": self.mean_diff,
            "sd_mean_diff": self.sd_mean_diff,
        }


def _values(s) -> np.ndarray:
    return np.asarray(getattr(s, "values", s), dtype=float).ravel()


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def score_average(s) -> float:
    v = _values(s)
    if v.size == 0:
        raise EmptySeries("cannot average an empty score series")
    return float(v.mean())


def relative_change(s, reference) -> float:
    ref = score_average(reference)
    if ref == 0:
        raise ZeroReferenceMean("reference score has zero mean")
    return (score_average(s) - ref) / ref


def long_run_variance(d: np.ndarray, lags: int) -> float:
    """Bartlett-kernel long-run variance of a series, floored at zero."""
    n = d.size
    dc = d - d.mean()
    lrv = float(dc @ dc) / n
    for k in range(1, min(lags, n - 1) + 1):
        gamma = float(dc[k:] @ dc[:-k]) / n
        lrv += 2.0 * (1.0 - k / (lags + 1.0)) * gamma
    return max(lrv, 0.0)


def dm_test(loss_a, loss_b, variance: str = "plain", lags: Optional[int] = None) -> DmResult:
    """Diebold-Mariano test on the loss differences A - B.

    Scores are negatively oriented, so a small one-sided p value
    (= Phi(statistic)) says A is significantly better than B.
    ``variance="bartlett"`` uses a HAC long-run variance over ``lags`` lags,
    useful when forecast windows overlap.
    """
    a, b = _values(loss_a), _values(loss_b)
    if a.shape != b.shape:
        raise LengthMismatch(f"loss series lengths differ: {a.size} vs {b.size}")
    n = a.size
    if n < 2:
        raise DegenerateSeries(f"DM test needs at least 2 windows, got {n}")
    d = a - b
    if not np.all(np.isfinite(d)):
        raise NonFiniteValue("loss series contain non-finite values")
    mean = float(d.mean())
    if variance == "plain":
        sd = float(np.std(d, ddof=1)) / math.sqrt(n)
    elif variance == "bartlett":
        if lags is None or lags < 0:
            raise ValueError("bartlett variance needs a nonnegative lag count")
        sd = math.sqrt(long_run_variance(d, lags) / n)
    else:
        raise ValueError(f"unknown variance estimator {variance!r}")
    if not sd > 0 or np.all(d == d[0]):
        raise ZeroVarianceDifferences("loss differences have zero variance; DM statistic undefined")
    stat = mean / sd
    return DmResult(statistic=stat, p_one_sided=normal_cdf(stat), n=n, mean_diff=mean, sd_mean_diff=sd)
