"""Empirical copulas of ensembles, copula observations and the copula scores."""

from __future__ import annotations

import math

import numpy as np

from .core import DegenerateSeries, OutOfUnitCube, ZeroWeightMass, as_ensemble, as_observation, validate_pairing
from .multivariate import EnergyEstimatorSpec, _weights, dawid_sebastiani_score, energy_terms, variogram_score

LB_CES = 0.25 - 0.5 / math.sqrt(6.0)


def _grid_ranks(values: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Column-wise ranks 1..n with ties broken by uniform random keys."""
    n, h = values.shape
    keys = rng.random((n, h))
    ranks = np.empty((n, h), dtype=np.int64)
    for c in range(h):
        order = np.lexsort((keys[:, c], values[:, c]))
        ranks[order, c] = np.arange(1, n + 1)
    return ranks


def rank_transform(ensemble, rng: np.random.Generator) -> np.ndarray:
    """Empirical copula sample of an ensemble on the mid-point grid (2r-1)/(2M).

    Without ties this is the mid-point rank divided by M; tied entries of a
    column are spread over their grid points in uniformly random order.
    """
    x = as_ensemble(ensemble)
    m = x.shape[0]
    if m < 2:
        raise DegenerateSeries("rank transform needs at least 2 paths")
    return (2.0 * _grid_ranks(x, rng) - 1.0) / (2.0 * m)


def copula_observation(ensemble, obs, midpoint: bool = True) -> np.ndarray:
    """Estimated copula observation: each y_h pushed through its column's ecdf."""
    validate_pairing(ensemble, obs)
    x = as_ensemble(ensemble)
    y = as_observation(obs)
    m, h = x.shape
    out = np.empty(h)
    for c in range(h):
        col = np.sort(x[:, c])
        le = np.searchsorted(col, y[c], side="right")
        if midpoint:
            lt = np.searchsorted(col, y[c], side="left")
            out[c] = 0.5 * (le + lt) / m
        else:
            out[c] = le / m
    return out


def adjust_copula_observations(raw, rng: np.random.Generator) -> np.ndarray:
    """Map an N x H stack of copula observations to perfectly uniform margins.

    Each column becomes a permutation of {(2R-1)/(2N)}, ordered like the raw
    values with ties broken at random.
    """
    u = np.asarray(raw, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    n = u.shape[0]
    if n < 2:
        raise DegenerateSeries(f"adjustment needs at least 2 windows, got {n}")
    return (2.0 * _grid_ranks(u, rng) - 1.0) / (2.0 * n)


def _check_unit(u: np.ndarray) -> None:
    if np.any(u < 0) or np.any(u > 1) or not np.all(np.isfinite(u)):
        raise OutOfUnitCube("copula observation must lie in [0, 1]^H")


def copula_energy_terms(cop, u, spec: EnergyEstimatorSpec = EnergyEstimatorSpec()) -> tuple[float, float]:
    u = as_observation(u)
    _check_unit(u)
    return energy_terms(cop, u, spec)


def copula_energy_score(cop, u, spec: EnergyEstimatorSpec = EnergyEstimatorSpec()) -> float:
    """Energy score of the copula sample, offset by LB_CES and scaled by 1/sqrt(H)."""
    if spec.beta != 1.0:
        raise ValueError("the copula energy score is defined for beta = 1 only")
    ed, ei = copula_energy_terms(cop, u, spec)
    h = as_ensemble(cop).shape[1]
    return (ed - 0.5 * ei - LB_CES) / math.sqrt(h)


def copula_variogram_score(cop, u, w=None, p: float = 1.0) -> float:
    """Variogram score of the copula sample divided by the total weight mass."""
    u = as_observation(u)
    _check_unit(u)
    h = as_ensemble(cop).shape[1]
    mass = float(_weights(w, h).sum())
    if mass <= 0:
        raise ZeroWeightMass("weight matrix has zero total mass")
    return variogram_score(cop, u, w, p) / mass


def copula_dss(cop, u) -> float:
    u = as_observation(u)
    _check_unit(u)
    return dawid_sebastiani_score(cop, u)
