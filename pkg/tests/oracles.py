"""Slow reference implementations used only by the tests.

Every function here is a direct transcription of a defining formula with
explicit loops; none of them share code with the package.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate


def crps_pairs(x, y):
    x = list(map(float, x))
    m = len(x)
    a = sum(abs(v - y) for v in x) / m
    b = sum(abs(u - v) for u in x for v in x) / m**2
    return a - 0.5 * b


def crps_integral(x, y):
    """Integral of (F_hat(z) - 1{z >= y})^2 over the real line, piece by piece."""
    xs = sorted(map(float, x))
    m = len(xs)
    knots = sorted(set(xs + [float(y)]))
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        mid = 0.5 * (lo + hi)
        f = sum(v <= mid for v in xs) / m
        step = 1.0 if mid >= y else 0.0
        total += (f - step) ** 2 * (hi - lo)
    return total


def crps_quad(x, y):
    """Same integral by adaptive quadrature; a third, independent route."""
    xs = np.sort(np.asarray(x, dtype=float))
    lo, hi = min(xs[0], y) - 1.0, max(xs[-1], y) + 1.0
    f = lambda z: (np.searchsorted(xs, z, side="right") / xs.size - (z >= y)) ** 2
    pts = sorted(set(xs.tolist() + [float(y)]))
    val, _ = integrate.quad(f, lo, hi, points=pts, limit=500)
    return val


def energy_all_pairs(x, y, beta=1.0):
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    ed = sum(np.linalg.norm(x[j] - y) ** beta for j in range(m)) / m
    ei = sum(np.linalg.norm(x[j] - x[k]) ** beta for j in range(m) for k in range(m) if j != k) / (m * (m - 1))
    return ed - 0.5 * ei


def energy_band(x, y, k, beta=1.0):
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    ed = sum(np.linalg.norm(x[j] - y) ** beta for j in range(m)) / m
    ei = sum(np.linalg.norm(x[j] - x[(j + s) % m]) ** beta for j in range(m) for s in range(1, k + 1)) / (m * k)
    return ed - 0.5 * ei


def variogram_full(x, y, w=None, p=1.0):
    x = np.asarray(x, dtype=float)
    m, h = x.shape
    w = np.ones((h, h)) if w is None else np.asarray(w, dtype=float)
    total = 0.0
    for i, j in itertools.product(range(h), range(h)):
        ex = sum(abs(x[r, i] - x[r, j]) ** p for r in range(m)) / m
        total += w[i, j] * (abs(y[i] - y[j]) ** p - ex) ** 2
    return total


def dss_direct(x, y):
    x = np.asarray(x, dtype=float)
    mu = x.mean(axis=0)
    cov = np.cov(x, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    d = np.asarray(y, dtype=float) - mu
    sign, logdet = np.linalg.slogdet(cov)
    return logdet + d @ np.linalg.inv(cov) @ d


def dm_statistic(a, b):
    d = [u - v for u, v in zip(a, b)]
    n = len(d)
    mean = sum(d) / n
    var = sum((v - mean) ** 2 for v in d) / (n - 1)
    return mean / math.sqrt(var / n)


def levinson_ar(x, p):
    """Yule-Walker through an explicit dense solve of the Toeplitz system."""
    x = np.asarray(x, dtype=float)
    t = x.size
    xc = x - x.mean()
    g = [sum(xc[i] * xc[i + k] for i in range(t - k)) / t for k in range(p + 1)]
    r = np.array([[g[abs(i - j)] for j in range(p)] for i in range(p)])
    phi = np.linalg.solve(r, np.array(g[1:]))
    phi0 = x.mean() * (1 - phi.sum())
    resid = [x[s] - phi0 - sum(phi[k] * x[s - 1 - k] for k in range(p)) for s in range(p, t)]
    return phi0, phi, np.array(resid)


# Vectorised brute-force forms for bulk checks; still O(M^2) and independent.


def crps_pairs_np(x, y):
    x = np.asarray(x, dtype=float)
    return np.mean(np.abs(x - y)) - 0.5 * np.mean(np.abs(x[:, None] - x[None, :]))


def crps_integral_np(x, y):
    knots = np.unique(np.append(np.asarray(x, dtype=float), y))
    mids = 0.5 * (knots[:-1] + knots[1:])
    f = (np.asarray(x)[None, :] <= mids[:, None]).mean(axis=1)
    step = (mids >= y).astype(float)
    return float(np.sum((f - step) ** 2 * np.diff(knots)))


def energy_all_pairs_np(x, y):
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    ed = np.mean(np.linalg.norm(x - y, axis=1))
    d = np.linalg.norm(x[:, None, :] - x[None, :, :], axis=2)
    return ed - 0.5 * d.sum() / (m * (m - 1))
