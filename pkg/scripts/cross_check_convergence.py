"""u-form vs w-form discrepancy under grid refinement (subcritical JL run)."""

import argparse
import math

from collapse_lab.config import initial_field
from collapse_lab.grid import build_grid
from collapse_lab.runs import demo_config
from collapse_lab.solver import check_cross

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="64,128,256,512,1024")
    args = ap.parse_args()
    cfg = demo_config("jl_subcritical")
    prev = None
    print("N,dt,max_discrepancy,observed_order")
    for N in (int(x) for x in args.sizes.split(",")):
        g = build_grid(N, cfg.params.R, cfg.params.n)
        out = check_cross(cfg.params, initial_field(cfg, g), cfg.T)
        gap = out["max_discrepancy"]
        order = "" if prev is None else f"{math.log2(prev / gap):.3f}"
        print(f"{N},{out['dt']:.3e},{gap:.6e},{order}")
        prev = gap
