"""Finite-volume time integration of the radial u-equation (JL and PE), and an
independent method-of-lines integrator for the JL mass function w.

Blow-up is only ever *reported*: either sup u crosses ``u_cap`` or the
stability-limited step collapses below ``dt_min``.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .elliptic import pe_matrix, solve_pe_values
from .functionals import MomentConfig, sample_moments, snap_s0
from .grid import MassFunction, RadialField, RadialGrid, to_mass_function
from .params import ModelParams, Variant

log = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "dt", "sup_u", "mass", "Mbar", "phi", "psi", "I1", "I2", "I3", "I4", "clip_mass")


class Scheme(str, enum.Enum):
    ExplicitEuler = "euler"
    RK2 = "rk2"
    IMEX = "imex"


class Status(str, enum.Enum):
    ReachedT = "ReachedT"
    BlowUpDetected = "BlowUpDetected"
    DtUnderflow = "DtUnderflow"


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeStepper:
    scheme: Scheme = Scheme.IMEX
    cfl_advection: float = 0.4
    cfl_diffusion: float = 0.9
    cfl_reaction: float = 0.2
    dt_min: float = 1e-13
    dt_max: float = 1e-2
    dt_init: float | None = None
    u_cap: float = 1e6
    limiter: str = "none"
    face_average: str = "arithmetic"
    clip_tol: float = 1e-6
    grow: float = 1.2

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        for name in ("cfl_advection", "cfl_diffusion", "cfl_reaction"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1], got {v}")
        if not 0 < self.dt_min < self.dt_max:
            raise ValueError("need 0 < dt_min < dt_max")
        if self.limiter not in ("none", "minmod"):
            raise ValueError(f"unknown limiter {self.limiter!r}")
        if self.face_average not in ("arithmetic", "harmonic"):
            raise ValueError(f"unknown face average {self.face_average!r}")

    @classmethod
    def from_dict(cls, d: dict) -> TimeStepper:
        return cls(**d)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["scheme"] = self.scheme.value
        return out


class MomentSeries:
    """Time series of the run diagnostics; one row per output time."""

    columns = SERIES_COLUMNS

    def __init__(self) -> None:
        self.rows: list[tuple[float, ...]] = []

    def append(self, row) -> None:
        self.rows.append(tuple(float(x) for x in row))

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def __getitem__(self, name: str) -> np.ndarray:
        return self.column(name)

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(f"{x:.17g}" for x in r) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> MomentSeries:
        out = cls()
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")
        if tuple(header) != cls.columns:
            raise ValueError(f"unexpected series header {header}")
        for ln in lines[1:]:
            out.append(float(x) for x in ln.split(","))
        return out


@dataclass
class RunResult:
    status: Status
    t_end: float
    field: RadialField
    series: MomentSeries
    snapshots: list[RadialField] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def t_star(self) -> float | None:
        return None if self.status is Status.ReachedT else self.t_end


class RadialModel:
    """Grid-resolved coefficients and the spatial operators for one run."""

    def __init__(self, params: ModelParams, grid: RadialGrid, stepper: TimeStepper | None = None):
        if grid.n != params.n or not math.isclose(grid.R, params.R):
            raise ValueError("grid does not match params (n, R)")
        self.params = params
        self.grid = grid
        self.stepper = stepper or TimeStepper()
        self.variant = Variant(params.variant)
        self.lam = params.lambda_fn(grid.centers)
        self.mu = params.mu_fn(grid.centers)
        self.has_reaction = not (params.lambda_fn.is_zero and params.mu_fn.is_zero)
        self.cond = grid.areas[1:-1] / grid.center_gaps  # interior faces
        self.pe_ab = pe_matrix(grid) if self.variant is Variant.PE else None

    # spatial pieces ---------------------------------------------------
    def vr(self, u: np.ndarray) -> np.ndarray:
        g = self.grid
        if self.variant is Variant.JL:
            # r M-bar/n - r^(1-n) w(r^n), written as a sum of deviations from
            # the mean so that a homogeneous state gives exactly zero
            Mbar = min(max(float(np.dot(u, g.ds)) / g.s[-1], u.min()), u.max())
            dev = np.cumsum((u - Mbar) * g.ds)[:-1] / g.n
            vr = np.zeros(g.N + 1)
            vr[1:-1] = -dev / g.faces[1:-1] ** (g.n - 1)
            return vr
        return solve_pe_values(g, u, self.pe_ab).vr

    def face_diffusivity(self, u: np.ndarray) -> np.ndarray:
        m = self.params.m
        if m == 1.0:
            return np.ones(self.grid.N - 1)
        D = (u + 1.0) ** (m - 1.0)
        if self.stepper.face_average == "harmonic":
            return 2.0 * D[1:] * D[:-1] / (D[1:] + D[:-1])
        return 0.5 * (D[1:] + D[:-1])

    def advective_flux(self, u: np.ndarray, vr: np.ndarray) -> np.ndarray:
        """Outward transport A * v_r * u_upwind at interior faces."""
        vi = vr[1:-1]
        left, right = u[:-1], u[1:]
        if self.stepper.limiter == "minmod" and u.size > 2:
            du = np.diff(u)
            slope = np.zeros_like(u)
            a, b = du[:-1], du[1:]
            slope[1:-1] = np.where(a * b > 0, np.sign(a) * np.minimum(abs(a), abs(b)), 0.0)
            left = left + 0.5 * slope[:-1]
            right = right - 0.5 * slope[1:]
        up = np.where(vi > 0, left, right)
        return self.grid.areas[1:-1] * vi * up

    def diffusive_flux(self, u: np.ndarray) -> np.ndarray:
        """Outward diffusive transport -A D u_r at interior faces."""
        return -self.cond * self.face_diffusivity(u) * np.diff(u)

    def reaction(self, u: np.ndarray) -> np.ndarray:
        if not self.has_reaction:
            return np.zeros_like(u)
        return self.lam * u - self.mu * u ** (1.0 + self.params.kappa)

    @staticmethod
    def divergence(flux: np.ndarray, V: np.ndarray) -> np.ndarray:
        """-(J_{i+1/2} - J_{i-1/2}) / V_i with zero flux at r = 0 and r = R."""
        full = np.concatenate([[0.0], flux, [0.0]])
        return -(full[1:] - full[:-1]) / V

    def rhs(self, u: np.ndarray, with_diffusion: bool = True, vr: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        if vr is None:
            vr = self.vr(u)
        flux = self.advective_flux(u, vr)
        if with_diffusion:
            flux = flux + self.diffusive_flux(u)
        return self.divergence(flux, self.grid.volumes) + self.reaction(u), vr

    # step-size control ------------------------------------------------
    def stable_dt(self, u: np.ndarray, vr: np.ndarray | None = None) -> float:
        g, st = self.grid, self.stepper
        if vr is None:
            vr = self.vr(u)
        A = g.areas
        out = (A[1:] * np.maximum(vr[1:], 0.0) + A[:-1] * np.maximum(-vr[:-1], 0.0)) / g.volumes
        rate_a = float(out.max())
        dt = st.cfl_advection / rate_a if rate_a > 0 else math.inf
        if st.scheme is not Scheme.IMEX:
            kD = self.cond * self.face_diffusivity(u)
            leak = np.zeros(g.N)
            leak[:-1] += kD
            leak[1:] += kD
            dt = min(dt, st.cfl_diffusion / float((leak / g.volumes).max()))
        if self.has_reaction:
            k = self.params.kappa
            rate_r = float(np.max(np.abs(self.lam - (1 + k) * self.mu * u**k)))
            if rate_r > 0:
                dt = min(dt, st.cfl_reaction / rate_r)
        return dt

    # one step -----------------------------------------------------------
    def step(self, u: np.ndarray, dt: float, vr: np.ndarray | None = None) -> np.ndarray:
        """Unclipped update; negative values are left for the caller.

        ``vr`` may carry the signal gradient of ``u`` when already known.
        """
        scheme = self.stepper.scheme
        if scheme is Scheme.ExplicitEuler:
            k1, _ = self.rhs(u, vr=vr)
            return u + dt * k1
        if scheme is Scheme.RK2:
            k1, _ = self.rhs(u, vr=vr)
            u1 = np.maximum(u + dt * k1, 0.0)
            k2, _ = self.rhs(u1)
            return u + 0.5 * dt * (k1 + k2)
        explicit, _ = self.rhs(u, with_diffusion=False, vr=vr)
        return self._implicit_diffusion(u, u + dt * explicit, dt)

    def _implicit_diffusion(self, u_old: np.ndarray, rhs: np.ndarray, dt: float) -> np.ndarray:
        g = self.grid
        kD = self.cond * self.face_diffusivity(u_old)
        ab = np.zeros((3, g.N))
        diag = g.volumes / dt
        diag[:-1] += kD
        diag[1:] += kD
        ab[1] = diag
        ab[0, 1:] = -kD
        ab[2, :-1] = -kD
        return solve_banded((1, 1), ab, g.volumes / dt * rhs)


def _clip(u_new: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, float]:
    neg = u_new < 0
    if not np.any(neg):
        return u_new, 0.0
    clip = float(-np.dot(u_new[neg], V[neg]))
    return np.where(neg, 0.0, u_new), clip


def step_u(u: RadialField, params: ModelParams, dt: float, stepper: TimeStepper | None = None) -> RadialField:
    """Advance one step of fixed size dt; negative values are clipped to zero."""
    model = RadialModel(params, u.grid, stepper)
    new = model.step(u.values, dt)
    if not np.all(np.isfinite(new)):
        raise IntegrationError(f"non-finite values after step at t={u.t}")
    new, _ = _clip(new, u.grid.volumes)
    return RadialField(u.grid, new, u.t + dt)


def _sample_row(model: RadialModel, u: np.ndarray, t: float, dt: float, clip: float, cfg: MomentConfig | None):
    g = model.grid
    M = float(np.dot(u, g.volumes))
    if cfg is None:
        mom = (math.nan,) * 6
    else:
        ms = sample_moments(RadialField(g, u, t), cfg, model.params)
        mom = (ms.phi, ms.psi, ms.I1, ms.I2, ms.I3, ms.I4)
    return (t, dt, float(u.max()), M, M / g.ball_volume, *mom, clip)


def run(
    params: ModelParams,
    u0: RadialField,
    T: float,
    stepper: TimeStepper | None = None,
    moments: MomentConfig | None = None,
    output_every: float | None = None,
    snapshot_every: int = 1,
    max_steps: int = 50_000_000,
) -> RunResult:
    """Integrate to min(T, detected blow-up), sampling every ``output_every``."""
    stepper = stepper or TimeStepper()
    g = u0.grid
    model = RadialModel(params, g, stepper)
    V = g.volumes
    output_every = output_every or T / 100
    if moments is not None:
        moments = MomentConfig(snap_s0(g, moments.s0)[1], moments.gamma)
    series = MomentSeries()
    snaps: list[RadialField] = []
    u = u0.values.copy()
    t = float(u0.t)
    dt = stepper.dt_init or stepper.dt_max
    clip_total = 0.0
    steps = rejections = 0
    max_clip_frac = 0.0
    n_out = 0
    wall = time.perf_counter()

    def record(last_dt: float) -> None:
        nonlocal n_out
        series.append(_sample_row(model, u, t, last_dt, clip_total, moments))
        if n_out % snapshot_every == 0:
            snaps.append(RadialField(g, u.copy(), t))
        n_out += 1

    record(0.0)
    next_out = t + output_every
    status = Status.ReachedT
    last_dt = 0.0
    eps_t = 1e-12 * max(T, 1.0)
    while t < T - eps_t:
        if steps >= max_steps:
            raise IntegrationError("max_steps exceeded")
        vr = model.vr(u)
        dt_cfl = model.stable_dt(u, vr)
        if dt_cfl < stepper.dt_min:
            status = Status.DtUnderflow
            break
        target = min(next_out, T)
        dt_try = min(dt, dt_cfl, stepper.dt_max, target - t)
        mass_now = float(np.dot(u, V))
        while True:
            new = model.step(u, dt_try, vr)
            ok = bool(np.all(np.isfinite(new)))
            if ok:
                new, clip = _clip(new, V)
                ok = clip <= stepper.clip_tol * max(mass_now, 1e-300)
            if ok:
                break
            rejections += 1
            dt_try *= 0.5
            dt = dt_try
            if dt_try < stepper.dt_min:
                break
        if dt_try < stepper.dt_min:
            status = Status.DtUnderflow
            break
        if mass_now > 0:
            max_clip_frac = max(max_clip_frac, clip / mass_now)
        clip_total += clip
        u = new
        t = target if target - (t + dt_try) <= eps_t else t + dt_try
        last_dt = dt_try
        steps += 1
        if dt_try >= dt:
            dt = min(dt * stepper.grow, stepper.dt_max)
        if u.max() >= stepper.u_cap:
            status = Status.BlowUpDetected
            break
        if t >= next_out - eps_t:
            record(last_dt)
            next_out += output_every
    if status is not Status.ReachedT or (series.rows and series.rows[-1][0] < t):
        record(last_dt)
    diagnostics = {
        "steps": steps,
        "rejections": rejections,
        "clip_mass": clip_total,
        "max_clip_fraction": max_clip_frac,
        "wall_seconds": time.perf_counter() - wall,
        "final_sup_u": float(u.max()),
        "final_mass": float(np.dot(u, V)),
        "last_dt": last_dt,
        "s0_effective": None if moments is None else moments.s0,
    }
    log.info("run finished: %s at t=%.6g after %d steps", status.value, t, steps)
    return RunResult(status, t, RadialField(g, u, t), series, snaps, diagnostics)


# ---------------------------------------------------------------------------
# w-form (JL only)


class MassFormModel:
    """Method of lines for w on the s-grid with centred derivatives."""

    def __init__(self, params: ModelParams, grid: RadialGrid):
        if Variant(params.variant) is not Variant.JL:
            raise ValueError("the w-form integrator exists for JL only")
        self.params = params
        self.grid = grid
        s = grid.s
        hm = s[1:-1] - s[:-2]
        hp = s[2:] - s[1:-1]
        self.d1 = (-hp / (hm * (hm + hp)), (hp - hm) / (hm * hp), hm / (hp * (hm + hp)))
        self.d2 = (2 / (hm * (hm + hp)), -2 / (hm * hp), 2 / (hp * (hm + hp)))
        self.lam = params.lambda_fn(grid.centers)
        self.mu = params.mu_fn(grid.centers)

    def sources(self, w: np.ndarray) -> np.ndarray:
        g, p = self.grid, self.params
        slope = np.maximum(np.diff(w) / g.ds, 0.0)
        cell = self.lam * slope * g.ds - g.n**p.kappa * self.mu * slope ** (1 + p.kappa) * g.ds
        return np.concatenate([[0.0], np.cumsum(cell)])

    def step(self, w: np.ndarray, dt: float) -> np.ndarray:
        g, p = self.grid, self.params
        n, s = g.n, g.s
        a_m, a_0, a_p = self.d1
        b_m, b_0, b_p = self.d2
        wi = w[1:-1]
        ws = a_m * w[:-2] + a_0 * wi + a_p * w[2:]
        D = np.maximum(n * ws + 1.0, 0.0) ** (p.m - 1.0)
        A = n**2 * s[1:-1] ** (2 - 2 / n) * D
        Mbar = n * w[-1] / s[-1]
        c = n * wi - Mbar * s[1:-1]
        S = self.sources(w)
        N = g.N
        # unknowns w_1..w_N; row N is the boundary mass law
        ab = np.zeros((3, N))
        lower = -dt * (A * b_m + c * a_m)
        diag = 1.0 - dt * (A * b_0 + c * a_0)
        upper = -dt * (A * b_p + c * a_p)
        ab[1, :-1] = diag
        ab[1, -1] = 1.0
        ab[0, 1:] = upper
        ab[2, :-2] = lower[1:]
        rhs = w[1:] + dt * S[1:]
        out = np.empty_like(w)
        out[0] = 0.0
        out[1:] = solve_banded((1, 1), ab, rhs)
        return out


def step_w(w: MassFunction, params: ModelParams, dt: float) -> MassFunction:
    """One linearly implicit step of the JL mass-function equation."""
    model = MassFormModel(params, w.grid)
    new = model.step(w.w, dt)
    if not np.all(np.isfinite(new)):
        raise IntegrationError(f"non-finite w after step at t={w.t}")
    g = w.grid
    return MassFunction(g, new, np.diff(new) / g.ds, w.t + dt)


def run_w(params: ModelParams, u0: RadialField, T: float, dt: float, output_times) -> list[MassFunction]:
    """Fixed-step w-form integration returning w at each requested time."""
    g = u0.grid
    model = MassFormModel(params, g)
    w = to_mass_function(u0).w.copy()
    t = float(u0.t)
    out = []
    for target in sorted(output_times):
        while t < target - 1e-12 * max(1.0, T):
            h = min(dt, target - t)
            w = model.step(w, h)
            if not np.all(np.isfinite(w)):
                raise IntegrationError(f"w-form diverged at t={t}")
            t = target if target - t - h < 1e-12 else t + h
        out.append(MassFunction(g, w.copy(), np.diff(w) / g.ds, t))
    return out


def check_cross(
    params: ModelParams,
    u0: RadialField,
    T: float,
    dt: float | None = None,
    n_out: int = 5,
) -> dict:
    """Relative sup-norm gap between the u-form and w-form JL solutions."""
    g = u0.grid
    if dt is None:
        dt = 0.1 * g.dr_min
    stepper = TimeStepper(scheme=Scheme.IMEX, dt_max=dt, dt_init=dt, dt_min=1e-14)
    times = [T * (k + 1) / n_out for k in range(n_out)]
    res = run(params, u0, T, stepper, output_every=T / n_out)
    u_at = {round(s.t, 12): s.values for s in res.snapshots}
    ws = run_w(params, u0, T, dt, times)
    gaps = []
    for t, w in zip(times, ws):
        u = u_at.get(round(t, 12))
        if u is None:
            u = min(res.snapshots, key=lambda sn: abs(sn.t - t)).values
        nws = g.n * np.diff(w.w) / g.ds
        gaps.append(float(np.max(np.abs(u - nws)) / max(np.max(np.abs(u)), 1e-300)))
    return {"times": times, "discrepancy": gaps, "max_discrepancy": max(gaps), "N": g.N, "dt": dt, "status": res.status.value}
