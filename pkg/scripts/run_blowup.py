"""Left vs right Radau on the two-circle problem.

Runs EI2-EI4 with each family (uniform node count per method), then right
Radau EI4 once more with the default per-level layout for comparison.
Exit status is 0 regardless of blow-ups; the summary lines tell the story.
"""

import argparse
import pathlib

from mbpei.cli import main

CONF = pathlib.Path(__file__).resolve().parent.parent / "configs" / "blowup.conf"

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs/blowup")
    ap.add_argument("--skip-default-layout", action="store_true")
    args = ap.parse_args()
    base = ["simulate", "--config", str(CONF), "-v"]
    main(base + ["--family", "left_radau", "--out", f"{args.out}/left"])
    main(base + ["--family", "right_radau", "--allow-non-mbp", "--out", f"{args.out}/right"])
    if not args.skip_default_layout:
        main(
            base
            + ["--family", "right_radau", "--allow-non-mbp", "--orders", "4"]
            + ["--scheme.uniform_nodes", "false", "--out", f"{args.out}/right_default_layout"]
        )
