"""Print the κ-supremum table (m = 1, α = 0) as exact rationals."""

import argparse
import sys

from collapse_lab.regions import table1_csv

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=10)
    args = ap.parse_args()
    sys.stdout.write(table1_csv(range(3, args.nmax + 1)))
