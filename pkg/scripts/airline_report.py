"""Print the airline score table and the |DM| of each standard model against its variants.

    python3 scripts/airline_report.py --m 4096 --seed 0 [--scheme innovation]
"""

from __future__ import annotations

import argparse

from mvscore.cli import default_series_path
from mvscore.core import read_series_csv
from mvscore.studies import study_config
from mvscore.timeseries import AIRLINE_MODELS, run_airline_study


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=4096)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scheme", choices=("rearranged", "innovation"), default="rearranged")
    ap.add_argument("--variance", choices=("plain", "bartlett"), default="plain")
    args = ap.parse_args(argv)

    cfg = study_config("airline", "desk", m=args.m, seed=args.seed, scheme=args.scheme)
    res = run_airline_study(read_series_csv(default_series_path()), cfg, variance=args.variance)
    table = res.summary["table"]
    scores = list(next(iter(table.values())))
    print(f"{'model':10s}" + "".join(f"{s:>11s}" for s in scores))
    for nm in AIRLINE_MODELS:
        print(f"{nm:10s}" + "".join(f"{table[nm][s]:11.4g}" for s in scores))

    idx = {nm: i for i, nm in enumerate(AIRLINE_MODELS)}
    print("\nDM statistic, standard model vs variant")
    for base in ("AR(12)", "AR(13)", "AR(p)"):
        for var in ("-M", "-W"):
            a, b = idx[base], idx[base + var]
            row = "  ".join(f"{s}={res.data['dm'][s][a, b]:8.2f}" for s in ("ES", "CRPS", "CES", "CVS"))
            print(f"{base:7s} vs {base + var:9s} {row}")
    print(f"\nAIC orders per window: {res.summary['aic_orders']}")


if __name__ == "__main__":
    main()
