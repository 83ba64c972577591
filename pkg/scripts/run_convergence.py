"""Temporal convergence table for EI2-EI5 on the sine problem.

    python scripts/run_convergence.py            # 128^2, four step sizes
    python scripts/run_convergence.py --full     # 256^2, five step sizes
"""

import argparse
import pathlib
import sys

from mbpei.cli import main

CONFIGS = pathlib.Path(__file__).resolve().parent.parent / "configs"

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--full", action="store_true")
    ap.add_argument("--out")
    args = ap.parse_args()
    conf = CONFIGS / ("convergence_full.conf" if args.full else "convergence_desk.conf")
    argv = ["converge", "--config", str(conf), "-v"] + (["--out", args.out] if args.out else [])
    sys.exit(main(argv))
