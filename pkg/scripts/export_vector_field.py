#!/usr/bin/env python3
"""Export displacement-field grids and equilibrium reports for plotting.

Runs the command-line front end in process and writes, per model, a
50x50 CSV grid over the default coupling window plus a JSON equilibrium
report.  Point a plotting tool at the CSVs; the log10 magnitude column
is the usual color channel.
"""

import argparse
import pathlib

from hfrg.cli import main as hfrg_main

WINDOWS = {
    "kondo": ("-1.0,0.5", "-0.1,0.15"),
    "graphene": ("-0.5,1.5", "-0.5,0.5"),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", nargs="?", default="fields",
                        help="output directory (default ./fields)")
    parser.add_argument("--resolution", type=int, default=50)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for model, (range_i, range_j) in WINDOWS.items():
        grid = out / f"{model}_field.csv"
        points = out / f"{model}_fixed_points.json"
        rc = hfrg_main(["vector-field", "--model", model,
                        f"--range-i={range_i}", f"--range-j={range_j}",
                        "--resolution", str(args.resolution),
                        "--output", str(grid)])
        if rc:
            raise SystemExit(rc)
        rc = hfrg_main(["fixed-points", model, "--output", str(points)])
        if rc:
            raise SystemExit(rc)
        print(f"wrote {grid} and {points}")


if __name__ == "__main__":
    main()
