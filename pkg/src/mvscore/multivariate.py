"""Ensemble estimators of the multivariate scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .core import (
    BandTooWide,
    DimensionMismatch,
    OddSampleForIidSplit,
    SampleTooSmall,
    SingularCovariance,
    WeightMatrix,
    as_ensemble,
    as_observation,
    validate_pairing,
)

# Cholesky pivots below this fraction of trace(Sigma) count as singular.
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class EnergyEstimatorSpec:
    """How the inner expectation E||X - X'||^beta is estimated.

    ``kind="k_band"`` averages the distances from each path to its ``k``
    cyclic successors (k=M-1 gives every distinct pair); ``kind="iid_split"``
    pairs the first half of the ensemble with the second half.
    """

    beta: float = 1.0
    kind: str = "k_band"
    k: int = 1

    def __post_init__(self):
        if not 0.0 < self.beta < 2.0:
            raise ValueError(f"beta must lie in (0, 2), got {self.beta}")
        if self.kind not in ("k_band", "iid_split"):
            raise ValueError(f"unknown energy estimator kind {self.kind!r}")
        if self.kind == "k_band" and self.k < 1:
            raise ValueError(f"band width K must be >= 1, got {self.k}")

    def check(self, m: int) -> None:
        if self.kind == "iid_split" and m % 2:
            raise OddSampleForIidSplit(f"iid split needs an even ensemble size, got M={m}")
        if self.kind == "k_band" and self.k > m - 1:
            raise BandTooWide(f"K={self.k} exceeds M-1={m - 1}")


def _norms_pow(d: np.ndarray, beta: float) -> np.ndarray:
    n = np.sqrt(np.einsum("ij,ij->i", d, d))
    return n if beta == 1.0 else n**beta


def energy_terms(ensemble, obs, spec: EnergyEstimatorSpec = EnergyEstimatorSpec()) -> tuple[float, float]:
    """Return the estimates (E||X - y||^beta, E||X - X'||^beta)."""
    validate_pairing(ensemble, obs)
    x = as_ensemble(ensemble)
    y = as_observation(obs)
    m = x.shape[0]
    spec.check(m)
    ed = float(np.mean(_norms_pow(x - y, spec.beta)))
    if spec.kind == "iid_split":
        half = m // 2
        ei = float(np.mean(_norms_pow(x[:half] - x[half:], spec.beta)))
    else:
        total = 0.0
        for k in range(1, spec.k + 1):
            total += float(np.sum(_norms_pow(x - np.roll(x, -k, axis=0), spec.beta)))
        ei = total / (m * spec.k)
    return ed, ei


def energy_score(ensemble, obs, spec: EnergyEstimatorSpec = EnergyEstimatorSpec()) -> float:
    ed, ei = energy_terms(ensemble, obs, spec)
    return ed - 0.5 * ei


def _weights(w, h: int) -> np.ndarray:
    if w is None:
        return np.ones((h, h))
    arr = w.w if isinstance(w, WeightMatrix) else np.asarray(w, dtype=float)
    if arr.shape != (h, h):
        raise DimensionMismatch(f"weight matrix shape {arr.shape} does not match H={h}")
    return arr


def variogram_score(ensemble, obs, w=None, p: float = 1.0) -> float:
    """Variogram score of order ``p``; ``w`` defaults to all-ones weights.

    Only the upper triangle is evaluated and doubled, the diagonal
    contributes nothing.
    """
    validate_pairing(ensemble, obs)
    if p <= 0:
        raise ValueError(f"variogram order p must be positive, got {p}")
    x = as_ensemble(ensemble)
    y = as_observation(obs)
    h = x.shape[1]
    wm = _weights(w, h)
    if h < 2:
        return 0.0
    iu, ju = np.triu_indices(h, k=1)
    obs_gap = np.abs(y[iu] - y[ju]) ** p
    ens_gap = np.mean(np.abs(x[:, iu] - x[:, ju]) ** p, axis=0)
    return float(2.0 * np.sum(wm[iu, ju] * (obs_gap - ens_gap) ** 2))


def dawid_sebastiani_score(ensemble, obs) -> float:
    """log det(S) + (y - mean)' S^-1 (y - mean) with the unbiased sample covariance S."""
    validate_pairing(ensemble, obs)
    x = as_ensemble(ensemble)
    y = as_observation(obs)
    m, h = x.shape
    if m <= h:
        raise SampleTooSmall(f"DSS needs M > H, got M={m}, H={h}")
    mu = x.mean(axis=0)
    xc = x - mu
    cov = (xc.T @ xc) / (m - 1)
    tr = float(np.trace(cov))
    if not tr > 0:
        raise SingularCovariance("sample covariance has zero trace")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularCovariance("sample covariance is not positive definite") from None
    piv = np.diag(chol)
    if np.min(piv) ** 2 < SINGULAR_RTOL * tr:
        raise SingularCovariance(
            f"sample covariance is numerically singular (min pivot {np.min(piv) ** 2:.3g}, trace {tr:.3g})"
        )
    z = solve_triangular(chol, y - mu, lower=True)
    return float(2.0 * np.sum(np.log(piv)) + z @ z)
