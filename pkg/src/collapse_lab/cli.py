"""Command line: region, simulate, certify, monitor, sweep, demo."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import runs
from .config import RunConfig
from .regions import region_verdict, table1_csv

log = logging.getLogger("collapse_lab")


def _setup_logging() -> None:
    level = os.environ.get("COLLAPSE_LAB_LOG", "error").lower()
    if level not in ("error", "info", "debug"):
        level = "error"
    logging.basicConfig(level=getattr(logging, level.upper()), format="%(levelname)s %(name)s: %(message)s")


def _load(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, default=str))


def cmd_region(args) -> int:
    if args.what == "table1":
        sys.stdout.write(table1_csv())
        return 0
    if args.n is None or args.m is None or args.kappa is None:
        raise SystemExit("region: --n, --m and --kappa are required (or use `region table1`)")
    _dump(region_verdict(args.n, args.m, args.kappa, args.alpha, args.p, args.variant))
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    res, _ = runs.simulate(cfg)
    out = runs.write_run(args.out, cfg, res)
    _dump({"status": res.status.value, "t_end": res.t_end, "t_star": res.t_star, "out": str(out)})
    return 0


def cmd_certify(args) -> int:
    cfg = _load(args)
    report = runs.certify(cfg, args.empirical)
    _dump(report)
    return 0 if report["feasible"] or not args.strict else 1


def cmd_monitor(args) -> int:
    rec = runs.read_run(args.run)
    ledger = runs.build_ledger(rec)
    out = Path(args.out) if args.out else Path(args.run) / "ledger.csv"
    runs.write_ledger(ledger, out)
    _dump({"ledger": str(out), "all_pass": ledger.all_pass, "checks": ledger.summary()})
    return 1 if args.strict and not ledger.all_pass else 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    values = [float(v) for v in args.values.split(",") if v.strip()] if args.values else []
    try:
        text = runs.sweep(cfg, args.axis, values, jobs=args.jobs, out=args.out)
    except ValueError as exc:
        print(f"sweep: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "summary.csv").write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_demo(args) -> int:
    try:
        cfg = runs.demo_config(args.name)
    except ValueError as exc:
        print(f"demo: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    out = args.out or f"runs/{args.name}"
    summary = runs.run_and_audit(cfg, out)
    _dump(summary)
    return 1 if args.strict and not summary["ledger_pass"] else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="collapse-lab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="run configuration (JSON)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--strict", action="store_true", help="non-zero exit on ledger failures")

    p = sub.add_parser("region", help="exact admissibility verdicts and the κ table")
    p.add_argument("what", nargs="?", choices=["table1"], help="print the κ-supremum table as CSV")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=str)
    p.add_argument("--kappa", type=str)
    p.add_argument("--alpha", type=str, default="0")
    p.add_argument("--p", type=str, default=None)
    p.add_argument("--variant", choices=["JL", "PE"], default="JL")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("simulate", help="integrate one configuration")
    common(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("certify", help="assemble the Riccati certificate")
    common(p)
    p.add_argument("--empirical", default=None, help="run directory to fit C1, C2 from")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("monitor", help="inequality ledger for a run directory")
    common(p, config=False)
    p.add_argument("--run", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("sweep", help="one run per value of a numeric field")
    common(p)
    p.add_argument("--axis", required=True)
    p.add_argument("--values", default="", help="comma separated")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo", help="run a packaged configuration")
    common(p, config=False)
    p.add_argument("name")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
