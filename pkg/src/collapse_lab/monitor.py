"""Inequality ledger along a numerical trajectory.

Every check is a pure function of (series or snapshot, configuration) and
returns :class:`LedgerEntry` rows; a failing row never stops anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import c_damping, c_signal_jl, diffusion_bound
from .functionals import MomentConfig, c_aggregation, c_phi_psi, check_w_psi_bound
from .grid import RadialField, RadialGrid, to_mass_function
from .params import ModelParams, Variant, validation_grid
from .regions import main_branch, q

TOL_IDENTITY = 1e-8
TOL_ODI = 1e-2
TOL_GROWTH = 1e-6
EPS_ABS = 1e-12

LEDGER_COLUMNS = ("t", "check_id", "lhs", "rhs", "margin", "pass", "applicable", "note")


@dataclass(frozen=True)
class LedgerEntry:
    t: float
    check_id: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    applicable: bool = True
    note: str = ""

    def row(self) -> str:
        note = self.note.replace(",", ";")
        return f"{self.t:.17g},{self.check_id},{self.lhs:.17g},{self.rhs:.17g},{self.margin:.17g},{int(self.passed)},{int(self.applicable)},{note}"


def entry(t, check_id, lhs, rhs, margin, tol, scale=None, note="") -> LedgerEntry:
    if scale is None:
        scale = max(abs(lhs), abs(rhs), EPS_ABS)
    return LedgerEntry(float(t), check_id, float(lhs), float(rhs), float(margin), bool(margin >= -tol * scale), True, note)


def not_applicable(t, check_id, note, lhs=math.nan, rhs=math.nan) -> LedgerEntry:
    return LedgerEntry(float(t), check_id, float(lhs), float(rhs), math.nan, True, False, note)


class Ledger(list):
    def to_csv(self) -> str:
        return ",".join(LEDGER_COLUMNS) + "\n" + "".join(e.row() + "\n" for e in self)

    @property
    def failures(self) -> list[LedgerEntry]:
        return [e for e in self if e.applicable and not e.passed]

    @property
    def all_pass(self) -> bool:
        return not self.failures

    def summary(self) -> dict:
        ids = sorted({e.check_id for e in self})
        out = {}
        for i in ids:
            rows = [e for e in self if e.check_id == i]
            app = [e for e in rows if e.applicable]
            out[i] = {
                "entries": len(rows),
                "applicable": len(app),
                "failed": sum(not e.passed for e in app),
                "min_margin": min((e.margin for e in app), default=math.nan),
            }
        return out


def resolution_threshold(grid: RadialGrid) -> float:
    """sup u above which the cell Péclet number near the origin exceeds 2."""
    return 2.0 * grid.n / grid.dr_min**2


def hypotheses_jl(params: ModelParams, u0: RadialField) -> tuple[bool, str]:
    """Nonincreasing λ, nondecreasing μ and a nonincreasing datum."""
    if Variant(params.variant) is not Variant.JL:
        return False, "variant is not JL"
    r = validation_grid(params.R)
    lam, mu = params.lambda_fn(r), params.mu_fn(r)
    if np.any(np.diff(lam) > 1e-14 * max(1.0, float(np.abs(lam).max()))):
        return False, "λ is not nonincreasing"
    if np.any(np.diff(mu) < -1e-14 * max(1.0, float(np.abs(mu).max()))):
        return False, "μ is not nondecreasing"
    if np.any(np.diff(u0.values) > 1e-12 * max(u0.sup, 1e-300)):
        return False, "initial datum is not radially nonincreasing"
    return True, ""


# checks -------------------------------------------------------------------


def check_mass_growth(series, params: ModelParams, M0: float | None = None, tol: float = TOL_GROWTH) -> Ledger:
    t = series["t"]
    M = series["mass"]
    M0 = float(M[0]) if M0 is None else M0
    out = Ledger()
    for ti, Mi in zip(t, M):
        rhs = M0 * math.exp(params.lambda1 * ti)
        out.append(entry(ti, "mass_growth", Mi, rhs, rhs - Mi, tol, scale=rhs))
    return out


def pointwise_jl_bound(params: ModelParams, t: float, r, M0: float | None = None) -> np.ndarray:
    M0 = params.M0 if M0 is None else M0
    return M0 * params.n * math.exp(params.lambda1 * t) / params.omega * np.asarray(r, dtype=float) ** (-params.n)


def check_pointwise_jl(
    snapshot: RadialField, params: ModelParams, M0: float | None = None, applicable: bool = True, note: str = "", tol: float = TOL_GROWTH
) -> LedgerEntry:
    """Worst cell of bound(r_i) - u_i for the JL r^-n envelope."""
    if not applicable:
        return not_applicable(snapshot.t, "pointwise_jl", note or "hypotheses not met")
    r = snapshot.grid.centers
    bound = pointwise_jl_bound(params, snapshot.t, r, M0)
    rel = (bound - snapshot.values) / bound
    i = int(np.argmin(rel))
    return entry(snapshot.t, "pointwise_jl", snapshot.values[i], bound[i], bound[i] - snapshot.values[i], tol, scale=bound[i], note=f"cell {i}")


def envelope_constant(snapshot: RadialField, p: float, faces: bool = True) -> float:
    """max_i u_i r_i^p, with r at the outer cell face (or the centre)."""
    g = snapshot.grid
    r = g.faces[1:] if faces else g.centers
    return float(np.max(snapshot.values * r**p))


def check_pointwise_pe(snapshot: RadialField, K: float, p: float, tol: float = TOL_GROWTH) -> LedgerEntry:
    r = snapshot.grid.centers
    bound = K * r ** (-p)
    rel = (bound - snapshot.values) / bound
    i = int(np.argmin(rel))
    env = envelope_constant(snapshot, p, faces=False)
    return entry(
        snapshot.t, "pointwise_pe", snapshot.values[i], bound[i], bound[i] - snapshot.values[i], tol, scale=bound[i], note=f"cell {i}; envelope {env:.6g}"
    )


def check_monotone(snapshot: RadialField, applicable: bool = True, tol: float = TOL_IDENTITY, note: str = "") -> LedgerEntry:
    if not applicable:
        return not_applicable(snapshot.t, "monotone", note or "hypotheses not met")
    u = snapshot.values
    rise = float(np.max(np.diff(u))) if u.size > 1 else 0.0
    sup = max(float(u.max()), EPS_ABS)
    return entry(snapshot.t, "monotone", rise, 0.0, -rise, tol, scale=sup)


def central_derivative(f, h1: float, h2: float) -> float:
    """Three-point derivative at the middle node, second order for unequal steps."""
    return (-h2 / (h1 * (h1 + h2))) * f[0] + ((h2 - h1) / (h1 * h2)) * f[1] + (h1 / (h2 * (h1 + h2))) * f[2]


def check_odi(
    series,
    cfg: MomentConfig,
    params: ModelParams,
    tol_odi: float = TOL_ODI,
    u_resolved: float | None = None,
    tol: float = TOL_IDENTITY,
) -> Ledger:
    """Central-difference φ' against I1+I2+I3+I4 at interior samples.

    Samples with sup u above ``u_resolved`` are reported as under-resolved.
    For JL the sharper signal-term bound is checked alongside.
    """
    t = series["t"]
    out = Ledger()
    if t.size < 3:
        out.append(not_applicable(t[0] if t.size else math.nan, "odi", "fewer than 3 samples"))
        return out
    ph, ps = series["phi"], series["psi"]
    I = np.column_stack([series["I1"], series["I2"], series["I3"], series["I4"]])
    sup_u = series["sup_u"]
    jl = Variant(params.variant) is Variant.JL
    cs = c_signal_jl(cfg.gamma)
    s0, g = cfg.s0, cfg.gamma
    for k in range(1, t.size - 1):
        h1, h2 = t[k] - t[k - 1], t[k + 1] - t[k]
        if h1 <= 0 or h2 <= 0:
            continue
        dphi = central_derivative(ph[k - 1 : k + 2], h1, h2)
        total = float(I[k].sum())
        scale = max(abs(dphi), float(np.abs(I[k]).sum()), EPS_ABS)
        if u_resolved is not None and max(sup_u[k - 1 : k + 2]) > u_resolved:
            out.append(LedgerEntry(t[k], "odi", dphi, total, dphi - total, dphi - total >= -tol_odi * scale, False, "under-resolved"))
        else:
            out.append(entry(t[k], "odi", dphi, total, dphi - total, tol_odi, scale=scale))
    if jl:
        for k in range(t.size):
            rhs = -cs * series["Mbar"][k] * s0 ** ((3 - g) / 2) * math.sqrt(max(ps[k], 0.0))
            out.append(entry(t[k], "signal_I3", I[k, 2], rhs, I[k, 2] - rhs, tol))
    else:
        for k in range(t.size):
            out.append(not_applicable(t[k], "signal_I3", "shape-only: constant not explicit", I[k, 2], s0 ** (2 / params.n + 1 - g)))
    return out


def check_lemma_bounds(
    series,
    cfg: MomentConfig,
    params: ModelParams,
    K: float | None = None,
    p: float | None = None,
    snapshots: list[RadialField] | None = None,
    tol: float = TOL_IDENTITY,
) -> Ledger:
    """Explicit-constant bounds on w, φ, I1, I2 and I4 at every sample.

    K, p default to the JL envelope M0 n e^{λ1 t_end}/ω with p = n.
    """
    n, s0, g = params.n, cfg.s0, cfg.gamma
    t = series["t"]
    if p is None:
        p = float(n)
    if K is None:
        K = float(pointwise_jl_bound(params, float(t[-1]), 1.0, float(series["mass"][0])))
    out = Ledger()
    C38 = c_phi_psi(g)
    C39 = c_aggregation(n, g)
    try:
        X4 = K**params.kappa * c_damping(n, p, params.kappa, params.alpha, params.mu1, g)
        damp_note = ""
    except ValueError as exc:
        X4, damp_note = None, str(exc)
    try:
        d = diffusion_bound(n, params.m, p, K, g)
        diff_note = ""
    except ValueError as exc:
        d, diff_note = None, str(exc)
    branch = main_branch(q(params.m), q(p)).value
    for k in range(t.size):
        ph, ps = series["phi"][k], series["psi"][k]
        rp = math.sqrt(max(ps, 0.0))
        tk = t[k]
        rhs = C38 * s0 ** ((3 - g) / 2) * rp
        out.append(entry(tk, "phi_psi", ph, rhs, rhs - ph, tol))
        I2 = series["I2"][k]
        rhs = C39 * s0 ** (g - 3) * ph**2
        out.append(entry(tk, "aggregation_I2", I2, rhs, I2 - rhs, tol))
        I4 = series["I4"][k]
        if X4 is None:
            out.append(not_applicable(tk, "damping_I4", damp_note, I4))
        else:
            rhs = -X4 * s0 ** ((3 - g) / 2 - p * params.kappa / n + params.alpha / n) * rp
            out.append(entry(tk, "damping_I4", I4, rhs, I4 - rhs, tol))
        I1 = series["I1"][k]
        if d is None:
            out.append(not_applicable(tk, "diffusion_I1", f"{branch}: {diff_note}", I1))
        else:
            rhs = d.value(s0, ps)
            out.append(entry(tk, "diffusion_I1", I1, rhs, I1 - rhs, tol, note=branch))
    for snap in snapshots or []:
        w = to_mass_function(snap)
        margin = check_w_psi_bound(w, cfg)
        scale = max(float(w.w[w.grid.s <= s0].max(initial=0.0)), EPS_ABS)
        out.append(entry(snap.t, "w_psi", margin, 0.0, margin, tol, scale=scale))
    return out


def check_homogeneous_ode(series, params: ModelParams, u0: float, tol: float = TOL_GROWTH) -> Ledger:
    """sup u against the closed-form logistic solution (constant λ, μ)."""
    lam = float(params.lambda_fn(0.0))
    mu = float(params.mu_fn(0.0))
    k = params.kappa
    out = Ledger()
    for ti, ui in zip(series["t"], series["sup_u"]):
        exact = logistic_solution(u0, lam, mu, k, ti)
        out.append(entry(ti, "logistic_ode", ui, exact, -abs(ui - exact), tol, scale=1.0))
    return out


def logistic_solution(u0: float, lam: float, mu: float, kappa: float, t) -> np.ndarray:
    """u' = λu - μu^(1+κ) for κ > 0 in closed form."""
    t = np.asarray(t, dtype=float)
    if kappa <= 0 or lam <= 0:
        raise ValueError("closed form needs κ > 0 and λ > 0")
    eq = mu / lam
    return (eq + (u0 ** (-kappa) - eq) * np.exp(-kappa * lam * t)) ** (-1.0 / kappa)
