"""Evaluate the slow test oracles on fixed inputs and store the results.

The frozen values pin the package against regressions in both directions:
tests compare the package to these numbers and, where cheap, recompute the
oracle as well.
"""

import json
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))
import oracles  # noqa: E402


def cases():
    rng = np.random.default_rng(20240917)
    out = []
    for i in range(25):
        m = int(rng.integers(2, 40))
        h = int(rng.integers(1, 5))
        x = np.round(rng.normal(size=(m, h)) * 3, 3)
        y = np.round(rng.normal(size=h) * 3, 3)
        k = int(rng.integers(1, m))
        case = {"x": x.tolist(), "y": y.tolist(), "k": k}
        case["crps"] = [oracles.crps_integral(x[:, c], y[c]) for c in range(h)]
        case["energy_band"] = oracles.energy_band(x, y, k)
        case["energy_pairs"] = oracles.energy_all_pairs(x, y)
        case["variogram"] = oracles.variogram_full(x, y, p=1.0) if h > 1 else 0.0
        case["variogram_half"] = oracles.variogram_full(x, y, p=0.5) if h > 1 else 0.0
        if m > h + 1:
            case["dss"] = float(oracles.dss_direct(x, y))
        out.append(case)
    return out


def ar_cases():
    rng = np.random.default_rng(7)
    out = []
    for p in (1, 2, 5):
        x = np.cumsum(rng.normal(size=40)) * 0.3 + rng.normal(size=40)
        phi0, phi, resid = oracles.levinson_ar(x, p)
        out.append({"x": x.tolist(), "p": p, "phi0": phi0, "phi": phi.tolist(), "sigma2": float(np.mean(resid**2))})
    return out


if __name__ == "__main__":
    dest = ROOT / "tests" / "golden" / "oracles.json"
    dest.write_text(json.dumps({"scores": cases(), "ar": ar_cases()}, indent=1))
    print(f"wrote {dest}")
