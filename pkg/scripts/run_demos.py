"""Run every packaged demo into runs/<name> and print one summary line each."""

import argparse
import time

from collapse_lab.runs import DEMOS, demo_config, run_and_audit

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs")
    ap.add_argument("names", nargs="*", default=list(DEMOS))
    args = ap.parse_args()
    for name in args.names:
        t0 = time.perf_counter()
        s = run_and_audit(demo_config(name), f"{args.out}/{name}")
        cert = s.get("certificate", {})
        print(
            f"{name}: {s['status']} t_end={s['t_end']:.6g} max_sup_u={s['max_sup_u']:.4g} "
            f"ledger_pass={s['ledger_pass']} certificate_feasible={cert.get('feasible')} ({time.perf_counter() - t0:.1f}s)"
        )
