"""Sweep κ across the JL threshold 1/3 for the concentrated n = 3 datum.

Blow-up is only guaranteed below 1/3 and need not stop above it, so this is
an exploratory scan rather than a threshold measurement.
"""

import argparse
import sys

from collapse_lab.runs import demo_config, sweep

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--values", default="0.1,0.2,0.3,0.4,0.6,1.0")
    ap.add_argument("--T", type=float, default=0.01)
    ap.add_argument("--jobs", type=int, default=2)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    cfg = demo_config("jl_n3_blowup").with_value("T", args.T)
    cfg.moments = None  # moments are not needed for the status scan
    cfg.output_every = args.T / 100
    values = [float(v) for v in args.values.split(",")]
    sys.stdout.write(sweep(cfg, "kappa", values, jobs=args.jobs, out=args.out))
