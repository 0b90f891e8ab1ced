"""Multivariate proper scoring rules for ensemble forecasts.

Energy, variogram and Dawid-Sebastiani scores, their copula counterparts,
the multiplicative marginal-copula score, Diebold-Mariano comparisons and
the simulation and autoregressive studies built on them.
"""

from .core import *  # noqa: F401,F403
from .univariate import crps, crps_per_horizon, default_weights, marginal_score
from .multivariate import EnergyEstimatorSpec, dawid_sebastiani_score, energy_score, energy_terms, variogram_score
from .copula import (
    LB_CES,
    adjust_copula_observations,
    copula_dss,
    copula_energy_score,
    copula_observation,
    copula_variogram_score,
    rank_transform,
)
from .combine import CombinedScoreReport, combine_marginal_copula
from .evaluation import DmResult, ScoreSeries, dm_test, relative_change, score_average

__version__ = "0.1.0"
