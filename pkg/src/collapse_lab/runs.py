"""Run directories: simulate, persist, reload, audit and certify."""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import monitor as mon
from .certificates import Profile, assemble_certificate, build_initial_datum, fit_odi_constants, phi0_lower_bound, theta_for
from .config import RunConfig, initial_field
from .elliptic import solve_pe_values
from .functionals import MomentConfig
from .grid import RadialField, RadialGrid, build_grid
from .params import Variant, validate
from .regions import q
from .solver import MomentSeries, RunResult, run

log = logging.getLogger(__name__)

DEMOS = ("jl_n3_blowup", "pe_n3_blowup", "jl_subcritical", "homogeneous_logistic")


@dataclass
class RunRecord:
    config: RunConfig
    series: MomentSeries
    snapshots: list[RadialField]
    result: dict

    @property
    def moment_config(self) -> MomentConfig | None:
        s0 = self.result.get("diagnostics", {}).get("s0_effective")
        cfg = self.config.moment_config()
        return None if cfg is None else MomentConfig(s0, cfg.gamma)


def simulate(cfg: RunConfig) -> tuple[RunResult, RadialField]:
    report = validate(cfg.params)
    if not report.ok:
        log.warning("standing hypotheses violated: %s", "; ".join(report.violations))
    grid = cfg.build_grid()
    u0 = initial_field(cfg, grid)
    res = run(
        cfg.params,
        u0,
        cfg.T,
        cfg.stepper,
        moments=cfg.moment_config(),
        output_every=cfg.output_every or cfg.T / 100,
        snapshot_every=cfg.snapshot_every,
    )
    return res, u0


# persistence --------------------------------------------------------------


def snapshot_csv(u: RadialField, variant: Variant) -> str:
    g = u.grid
    head = f"# n={g.n},R={g.R!r},N={g.N},t={u.t!r},variant={Variant(variant).value}\n"
    cols = ["r", "u", "r_lo", "r_hi"]
    data = [g.centers, u.values, g.faces[:-1], g.faces[1:]]
    if Variant(variant) is Variant.PE:
        cols.append("v")
        data.append(solve_pe_values(g, u.values).v)
    rows = np.column_stack(data)
    body = "\n".join(",".join(f"{x:.17g}" for x in row) for row in rows)
    return head + ",".join(cols) + "\n" + body + "\n"


def read_snapshot(path: Path, grid: RadialGrid | None = None) -> RadialField:
    lines = Path(path).read_text().splitlines()
    meta = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split(","))
    data = np.loadtxt(lines[2:], delimiter=",", ndmin=2)
    if grid is None:
        faces = np.concatenate([[0.0], data[:, 3]])
        grid = RadialGrid(faces, int(meta["n"]))
    return RadialField(grid, data[:, 1], float(meta["t"]))


def write_run(out: str | Path, cfg: RunConfig, res: RunResult) -> Path:
    out = Path(out)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    for old in (out / "snapshots").glob("snap_*.csv"):
        old.unlink()
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
    (out / "series.csv").write_text(res.series.to_csv())
    for k, snap in enumerate(res.snapshots):
        (out / "snapshots" / f"snap_{k:05d}.csv").write_text(snapshot_csv(snap, cfg.params.variant))
    result = {
        "status": res.status.value,
        "t_end": res.t_end,
        "t_star": res.t_star,
        "diagnostics": res.diagnostics,
    }
    (out / "result.json").write_text(json.dumps(result, indent=2) + "\n")
    return out


def read_run(run_dir: str | Path) -> RunRecord:
    d = Path(run_dir)
    if not (d / "series.csv").exists():
        raise FileNotFoundError(f"{d} is not a run directory (no series.csv)")
    cfg = RunConfig.from_json(d / "config.json")
    series = MomentSeries.from_csv((d / "series.csv").read_text())
    grid = cfg.build_grid()
    snaps = [read_snapshot(p, grid) for p in sorted((d / "snapshots").glob("snap_*.csv"))]
    result = json.loads((d / "result.json").read_text())
    return RunRecord(cfg, series, snaps, result)


# audit --------------------------------------------------------------------


def build_ledger(rec: RunRecord) -> mon.Ledger:
    cfg, series, snaps = rec.config, rec.series, rec.snapshots
    params = cfg.params
    ledger = mon.Ledger()
    ledger += mon.check_mass_growth(series, params)
    M0 = float(series["mass"][0])
    grid = snaps[0].grid if snaps else cfg.build_grid()
    p = float(cfg.decay_exponent())
    K = None
    if Variant(params.variant) is Variant.JL:
        ok, why = mon.hypotheses_jl(params, snaps[0]) if snaps else (False, "no snapshots")
        for s in snaps:
            ledger.append(mon.check_pointwise_jl(s, params, M0=M0, applicable=ok, note=why))
            ledger.append(mon.check_monotone(s, applicable=ok, note=why))
        if ok:
            K = float(mon.pointwise_jl_bound(params, float(series["t"][-1]), 1.0, M0))
    if K is None and snaps:
        # empirical envelope over the whole run (outer faces)
        K = max(mon.envelope_constant(s, p) for s in snaps)
        K_user = cfg.monitor.get("K")
        for s in snaps:
            if K_user is not None:
                ledger.append(mon.check_pointwise_pe(s, float(K_user), p))
            else:
                e = mon.check_pointwise_pe(s, mon.envelope_constant(snaps[0], p, faces=False), p)
                ledger.append(mon.LedgerEntry(e.t, e.check_id, e.lhs, e.rhs, e.margin, e.passed, False, "empirical envelope; " + e.note))
    mcfg = rec.moment_config
    if mcfg is not None and len(series) > 0 and not math.isnan(series["phi"][0]):
        ledger += mon.check_odi(series, mcfg, params, tol_odi=cfg.monitor.get("tol_odi", mon.TOL_ODI), u_resolved=mon.resolution_threshold(grid))
        ledger += mon.check_lemma_bounds(series, mcfg, params, K=K, p=p, snapshots=snaps)
    if cfg.initial.get("profile") == "constant" and params.kappa > 0 and params.lambda_fn.kind == "constant" and params.mu_fn.kind == "constant":
        lam = float(params.lambda_fn(0.0))
        if lam > 0:
            ledger += mon.check_homogeneous_ode(series, params, float(cfg.initial.get("value", 1.0)))
    return ledger


def write_ledger(ledger: mon.Ledger, path: str | Path) -> None:
    Path(path).write_text(ledger.to_csv())


# certificates -------------------------------------------------------------


def certify(cfg: RunConfig, empirical: str | Path | None = None) -> dict:
    """Certificate report for a config, optionally with C1, C2 fitted to a run."""
    cert_cfg = dict(cfg.certificate or {})
    params = cfg.params
    p = cert_cfg.get("p", str(cfg.decay_exponent()))
    T = float(cert_cfg.get("T", cfg.T))
    K = cert_cfg.get("K")
    if K is None:
        K = float(mon.pointwise_jl_bound(params, T, 1.0))
    C1, C2 = cert_cfg.get("C1"), cert_cfg.get("C2")
    gamma = cert_cfg.get("gamma")
    fit = None
    if empirical is not None:
        rec = read_run(empirical)
        mcfg = rec.moment_config
        if mcfg is None:
            raise ValueError("empirical run has no moment series")
        theta = float(theta_for(params.n, q(params.m), q(p), q(params.kappa), q(params.alpha)).theta)
        C1, C2 = fit_odi_constants(rec.series["t"], rec.series["phi"], mcfg.s0, mcfg.gamma, theta)
        gamma = str(mcfg.gamma) if gamma is None else gamma
        fit = {"run": str(empirical), "s0": mcfg.s0, "gamma": mcfg.gamma, "C1": C1, "C2": C2}
    cert = assemble_certificate(params, p, K, T, gamma=gamma, C1=C1, C2=C2, eta=float(cert_cfg.get("eta", 0.25)))
    out = cert.to_dict()
    out["p"] = str(p)
    out["K"] = K
    if fit is not None:
        out["constants"]["source"] = "empirical"
        out["fit"] = fit
    if cert.feasible and cert.r1 < params.R:
        check = cert_cfg.get("datum_check")
        if check:
            grid = build_grid(int(check.get("N", 400)), params.R, params.n, "graded", float(check.get("ratio", 0.95)))
            u0 = build_initial_datum(params, grid, cert.r1, float(p), float(check.get("L", K)), Profile(check.get("profile", "CappedPower")))
            c = phi0_lower_bound(u0, cert.s0, cert.gamma, 0.5, params.M1)
            out["phi0_check"] = {"lhs": c.lhs, "rhs": c.rhs, "margin": c.margin, "precondition_ok": c.precondition_ok}
    return out


# demos and sweeps ---------------------------------------------------------


def demo_config(name: str) -> RunConfig:
    if name not in DEMOS:
        raise ValueError(f"unknown demo {name!r}; choose from {', '.join(DEMOS)}")
    text = resources.files("collapse_lab").joinpath("demos", f"{name}.json").read_text()
    return RunConfig.from_dict(json.loads(text))


def run_and_audit(cfg: RunConfig, out: str | Path, with_certificate: bool = True) -> dict:
    res, _ = simulate(cfg)
    out = write_run(out, cfg, res)
    rec = read_run(out)
    ledger = build_ledger(rec)
    write_ledger(ledger, out / "ledger.csv")
    summary = {
        "name": cfg.name,
        "status": res.status.value,
        "t_end": res.t_end,
        "t_star": res.t_star,
        "expected": cfg.expect,
        "max_sup_u": float(np.max(res.series["sup_u"])),
        "ledger_pass": ledger.all_pass,
        "ledger": ledger.summary(),
    }
    if with_certificate and cfg.certificate is not None:
        try:
            summary["certificate"] = certify(cfg)
        except ValueError as exc:
            summary["certificate"] = {"feasible": False, "reason": str(exc)}
        (out / "certificate.json").write_text(json.dumps(summary["certificate"], indent=2) + "\n")
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=str) + "\n")
    return summary


def _sweep_one(args) -> tuple:
    cfg_dict, axis, value, out = args
    cfg = RunConfig.from_dict(cfg_dict).with_value(axis, value)
    res, _ = simulate(cfg)
    if out is not None:
        write_run(Path(out) / f"{axis}={value}", cfg, res)
    t_star = "" if res.t_star is None else f"{res.t_star:.17g}"
    return (value, res.status.value, t_star, float(np.max(res.series["sup_u"])))


def sweep(cfg: RunConfig, axis: str, values, jobs: int = 1, out: str | Path | None = None) -> str:
    """One run per value; returns the summary CSV (value, status, t_star, max_sup_u)."""
    values = list(values)
    if values:
        cfg.with_value(axis, values[0])  # validates the axis up front
    tasks = [(cfg.to_dict(), axis, v, None if out is None else str(out)) for v in values]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    lines = [f"{axis},status,t_star,max_sup_u"]
    lines += [f"{v!r},{s},{t},{m:.17g}" for v, s, t, m in rows]
    return "\n".join(lines) + "\n"
