"""Multiplicative marginal-copula score and its covariance-corrected plug-in estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegenerateSeries, LengthMismatch, NonFiniteValue


@dataclass(frozen=True)
class CombinedScoreReport:
    per_window: np.ndarray
    aggregate: float
    ms_mean: float
    cs_mean: float
    covariance: float


def combine_marginal_copula(ms, cs) -> CombinedScoreReport:
    """Combine per-window marginal and copula scores.

    ``aggregate`` is mean(MS) * mean(CS) minus the sample covariance (divisor
    N-1) of the two series; ``per_window`` holds the products MS_i * CS_i and
    is the loss series used for significance testing.
    """
    a = np.asarray(getattr(ms, "values", ms), dtype=float).ravel()
    b = np.asarray(getattr(cs, "values", cs), dtype=float).ravel()
    if a.shape != b.shape:
        raise LengthMismatch(f"series lengths differ: {a.size} vs {b.size}")
    if a.size < 2:
        raise DegenerateSeries(f"need at least 2 windows, got {a.size}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise NonFiniteValue("score series contain non-finite values")
    ma, mb = float(a.mean()), float(b.mean())
    cov = float(np.sum((a - ma) * (b - mb)) / (a.size - 1))
    return CombinedScoreReport(
        per_window=a * b,
        aggregate=ma * mb - cov,
        ms_mean=ma,
        cs_mean=mb,
        covariance=cov,
    )
