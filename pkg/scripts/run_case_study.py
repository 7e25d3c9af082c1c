#!/usr/bin/env python3
"""Run the full iron case study end to end and drop all reports in ./out.

Steps: stationary-point analysis, interval contraction of the search box,
the 48 h cutoff simulation with monitoring, the sensitivity scan, and a
desk-scale robust-region expansion.
"""

import argparse
import sys
import time

from ferrostat import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--samples", type=int, default=500)
    ap.add_argument("--rounds", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=2)
    args = ap.parse_args()

    common = [
        "--out-dir", args.out_dir,
        "--seed", str(args.seed),
        "--samples", str(args.samples),
        "--rounds", str(args.rounds),
        "--jobs", str(args.jobs),
    ]
    for command in ("steady", "contract", "simulate", "monitor", "sensitivity", "explore"):
        t0 = time.time()
        code = cli.main([command, *common])
        print(f"[{command}] exit={code} ({time.time() - t0:.1f} s)")
        if code != 0:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
