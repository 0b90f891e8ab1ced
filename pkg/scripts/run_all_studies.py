"""Run every study through the CLI and collect outputs under one directory.

    python3 scripts/run_all_studies.py --out results --threads 4
    python3 scripts/run_all_studies.py --paper-scale   # hours
"""

from __future__ import annotations

import argparse
import sys
import time

from mvscore.cli import main as cli_main
from mvscore.studies import STUDIES


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--paper-scale", action="store_true")
    ap.add_argument("--only", nargs="+", choices=STUDIES)
    args = ap.parse_args(argv)
    status = 0
    for name in args.only or STUDIES:
        t0 = time.perf_counter()
        cmd = ["study", name, "--out", f"{args.out}/{name}", "--threads", str(args.threads), "--seed", str(args.seed)]
        if args.paper_scale:
            cmd.append("--paper-scale")
        rc = cli_main(cmd)
        print(f"{name}: exit {rc} in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        status = status or rc
    return status


if __name__ == "__main__":
    sys.exit(main())
