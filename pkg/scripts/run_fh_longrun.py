"""Flory-Huggins coarsening to T = 50 with EI2-EI5; prints bound and energy summaries."""

import argparse
import pathlib
import sys

from mbpei.cli import main

CONF = pathlib.Path(__file__).resolve().parent.parent / "configs" / "fh_longrun.conf"

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--tau", type=float, default=0.1)
    ap.add_argument("--out")
    args = ap.parse_args()
    argv = ["simulate", "--config", str(CONF), "--tau", str(args.tau), "-v"]
    sys.exit(main(argv + (["--out", args.out] if args.out else [])))
