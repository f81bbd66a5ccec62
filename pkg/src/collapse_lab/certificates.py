"""Riccati blow-up witnesses, explicit bound constants, s0/r1 selection and
concentrated initial data."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .functionals import MomentConfig, beta, phi
from .grid import RadialField, RadialGrid, to_mass_function
from .params import ModelParams, Variant
from .regions import Branch, GammaWindow, gamma_window, kappa_sup_main, main_branch, pos, q

LN3 = math.log(3.0)


@dataclass(frozen=True)
class RiccatiWitness:
    a: float
    b: float
    y0: float

    @property
    def rho(self) -> float:
        return math.sqrt(self.a / self.b) * self.y0

    @property
    def blow_up_time(self) -> float:
        rho = self.rho
        if rho <= 1:
            return math.inf
        return math.log1p(2.0 / (rho - 1.0)) / (2.0 * math.sqrt(self.a * self.b))

    @property
    def bound_ln3(self) -> float:
        return LN3 / (2.0 * math.sqrt(self.a * self.b))

    def to_dict(self) -> dict:
        return {**asdict(self), "rho": self.rho, "blow_up_time": self.blow_up_time, "bound_ln3": self.bound_ln3}


def riccati_blow_up_time(a: float, b: float, y0: float) -> RiccatiWitness:
    """Witness for y' = a y^2 - b, y(0) = y0."""
    for name, v in (("a", a), ("b", b), ("y0", y0)):
        if not (v > 0 and math.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite, got {v}")
    return RiccatiWitness(float(a), float(b), float(y0))


@dataclass(frozen=True)
class ThetaExponent:
    theta: Fraction
    branch: Branch


def theta_for(n, m, p, kappa, alpha=0) -> ThetaExponent:
    n, m, p, kappa, alpha = q(n), q(m), q(p), q(kappa), q(alpha)
    bound = kappa_sup_main(n, m, p, alpha)
    if not bound.admits(kappa):
        raise ValueError(f"(m={m}, κ={kappa}) not admissible for n={n}, p={p}: sup κ = {bound.sup_kappa} {bound.reason}")
    damp = 2 * p * kappa / n - 2 * alpha / n
    if bound.branch is Branch.LargeM:
        lead = 4 / n + 2 * p / n * pos(m - 1)
    else:
        lead = 2 / n + p * m / n
    theta = max(lead, 2 / n, 2 - 2 / n, damp)
    assert 0 < theta < 2, theta
    return ThetaExponent(theta, bound.branch)


# explicit bound constants ---------------------------------------------------


def c_damping(n: int, p: float, kappa: float, alpha: float, mu1: float, gamma: float) -> float:
    """Constant of the I4 lower bound (needs pκ/n - α/n < γ/2)."""
    e = alpha / n - p * kappa / n + gamma / 2
    if e <= 0:
        raise ValueError("damping exponent condition pκ/n - α/n < γ/2 fails")
    return mu1 * math.sqrt(2.0) * (max(p * kappa / n - alpha / n, 0.0) + 1.0) / (1 - gamma) * beta(e, 0.5)


def c_phi_psi(gamma: float) -> float:
    return math.sqrt(2.0) * beta(1 - gamma / 2, 0.5)


def c_aggregation(n: int, gamma: float) -> float:
    return n / (2.0 * beta(1 - gamma / 2, 0.5) ** 2)


def c_signal_jl(gamma: float) -> float:
    """sqrt(2) B(2 - γ/2, 1/2): the JL signal term is >= -this * M-bar * s0^((3-γ)/2) sqrt(psi)."""
    return math.sqrt(2.0) * beta(2 - gamma / 2, 0.5)


@dataclass(frozen=True)
class DiffusionBound:
    """I1 >= -coef * s0^e_sqrt * sqrt(psi) - sum(c_k * s0^e_k)."""

    coef: float
    e_sqrt: float
    consts: tuple[tuple[float, float], ...]  # (constant, exponent)
    branch: Branch

    def value(self, s0: float, psi: float) -> float:
        out = -self.coef * s0**self.e_sqrt * math.sqrt(max(psi, 0.0))
        return out - sum(c * s0**e for c, e in self.consts)


def diffusion_bound(n: int, m: float, p: float, K: float, gamma: float) -> DiffusionBound:
    """Lower bound for I1 in the branch fixed by m >= 2/p.

    The large-m form keeps the factor n/m produced by the first integration
    by parts.
    """
    g = gamma
    if main_branch(q(m), q(p)) is Branch.LargeM:
        P = p / n * max(m - 1, 0.0)
        if not 1 - 2 / n - P < g < 2 - 4 / n - 2 * P:
            raise ValueError(f"gamma={g} outside the large-m diffusion window")
        c1 = max(n, 2 ** (m - 1), 2 ** (m - 1) * n * K ** max(m - 1, 0.0))
        c3 = math.sqrt(2.0) * beta(1 - 2 / n - P - g / 2, 0.5)
        coef = n / m * c1 * (2 - 2 / n - g) * (g + 2 / n + P) * c3
        return DiffusionBound(coef, (3 - g) / 2 - 2 / n - P, ((n / m * c1, 3 - g - 2 / n),), Branch.LargeM)
    if not 0 < g < 2 - 2 / n - p * m / n:
        raise ValueError(f"gamma={g} outside the small-m diffusion window")
    c4 = (2 - 2 / n - g) / (2 - 2 / n - p * m / n - g) * (K**m * n / m)
    return DiffusionBound(0.0, 0.0, ((c4, 3 - g - 2 / n - p * m / n), (n / m, 3 - g - 2 / n)), Branch.SmallM)


@dataclass(frozen=True)
class CertificateConstants:
    C3: float
    C_damping: float
    C_phi_psi: float
    C_aggregation: float
    C1: float
    C2: float
    source: str

    def phi0(self, s0: float, gamma: float) -> float:
        return self.C3 * s0 ** (2 - gamma)

    def to_dict(self) -> dict:
        return asdict(self)


def conservative_jl_constants(params: ModelParams, p: float, K: float, T: float, gamma: float, theta: float, eta: float = 0.25):
    """C1, C2 for JL from the explicit bound constants and Young's inequality.

    Each sqrt(psi) term X s0^e sqrt(psi) is split as eta psi + X^2 s0^(2e)/(4 eta),
    and s0 <= R^n lifts every power to s0^(3-γ-θ).
    """
    n, R = params.n, params.R
    if not 0 < eta < n / 3:
        raise ValueError(f"Young parameter must lie in (0, n/3), got {eta}")
    Rn = R**n
    C38 = c_phi_psi(gamma)
    C1 = (n - 3 * eta) / C38**2
    terms: list[tuple[float, float]] = []  # (coefficient of s0^(3-γ-θ_k), θ_k)
    d = diffusion_bound(n, params.m, p, K, gamma)
    if d.coef > 0:
        terms.append((d.coef**2 / (4 * eta), 3 - gamma - 2 * d.e_sqrt))
    for c, e in d.consts:
        terms.append((c, 3 - gamma - e))
    Mbar_max = params.M0 * math.exp(params.lambda1 * T) / params.volume
    terms.append(((c_signal_jl(gamma) * Mbar_max) ** 2 / (4 * eta), 0.0))
    if params.mu1 > 0 and not params.mu_fn.is_zero:
        X4 = K**params.kappa * c_damping(n, p, params.kappa, params.alpha, params.mu1, gamma)
        terms.append((X4**2 / (4 * eta), 2 * p * params.kappa / n - 2 * params.alpha / n))
    C2 = 0.0
    for coef, th in terms:
        if th > theta + 1e-12:
            raise ValueError(f"term exponent {th} exceeds theta={theta}")
        C2 += coef * Rn ** (theta - th)
    return C1, C2


@dataclass(frozen=True)
class Certificate:
    gamma: float
    theta: float
    s0: float | None
    r1: float | None
    j: int | None
    witness: RiccatiWitness | None
    constants: CertificateConstants
    feasible: bool
    reason: str = ""

    def to_dict(self) -> dict:
        w = self.witness
        return {
            "gamma": self.gamma,
            "theta": self.theta,
            "s0": self.s0,
            "r1": self.r1,
            "dyadic_j": self.j,
            "a": None if w is None else w.a,
            "b": None if w is None else w.b,
            "phi0": None if w is None else w.y0,
            "blow_up_time": None if w is None else w.blow_up_time,
            "blow_up_time_bound": None if w is None else w.bound_ln3,
            "feasible": self.feasible,
            "reason": self.reason,
            "constants": self.constants.to_dict(),
        }


def default_gamma(window: GammaWindow) -> Fraction:
    if window.empty:
        raise ValueError(f"empty gamma window: {window.reason}")
    return window.midpoint


def dyadic_search(C1: float, C2: float, C3: float, gamma: float, theta: float, T: float, Rn: float, j_max: int = 60):
    """Largest s0 = Rn 2^-j with ln3/(2 sqrt(ab)) < T and phi0 sqrt(a/b) > 2."""
    for j in range(j_max + 1):
        s0 = Rn * 2.0**-j
        a = C1 * s0 ** (gamma - 3)
        b = C2 * s0 ** (3 - gamma - theta)
        y0 = C3 * s0 ** (2 - gamma)
        w = riccati_blow_up_time(a, b, y0)
        if w.bound_ln3 < T and w.rho > 2:
            return j, s0, w
    return None


def assemble_certificate(
    params: ModelParams,
    p,
    K: float,
    T: float,
    gamma=None,
    C1: float | None = None,
    C2: float | None = None,
    eta: float = 0.25,
) -> Certificate:
    """Select γ, θ and the dyadic s0 of the blow-up argument.

    Without explicit C1, C2 a conservative pair is assembled (JL only).
    """
    n = params.n
    window = gamma_window(n, q(params.m), q(p), q(params.kappa), q(params.alpha))
    g = q(gamma) if gamma is not None else default_gamma(window)
    if g not in window:
        raise ValueError(f"gamma={g} outside the admissible window ({window.lower}, {window.upper})")
    th = theta_for(n, q(params.m), q(p), q(params.kappa), q(params.alpha)).theta
    gf, tf, pf = float(g), float(th), float(p)
    if C1 is None or C2 is None:
        if Variant(params.variant) is not Variant.JL:
            raise ValueError("PE certificates need C1 and C2 from config or an empirical fit")
        C1, C2 = conservative_jl_constants(params, pf, K, T, gf, tf, eta)
        source = "conservative"
    else:
        source = "supplied"
    if not (C1 > 0 and C2 > 0):
        raise ValueError("C1 and C2 must be positive")
    try:
        cd = c_damping(n, pf, params.kappa, params.alpha, params.mu1, gf)
    except ValueError:
        cd = math.nan
    consts = CertificateConstants(
        C3=params.M1 / (4 * params.omega),
        C_damping=cd,
        C_phi_psi=c_phi_psi(gf),
        C_aggregation=c_aggregation(n, gf),
        C1=float(C1),
        C2=float(C2),
        source=source,
    )
    found = dyadic_search(C1, C2, consts.C3, gf, tf, T, params.R**n)
    if found is None:
        return Certificate(gf, tf, None, None, None, None, consts, False, "no feasible s0 above 2^-60 R^n; C1/C2 too pessimistic")
    j, s0, w = found
    return Certificate(gf, tf, s0, (s0 / 2) ** (1 / n), j, w, consts, True)


# initial data -------------------------------------------------------------


class Profile(str, enum.Enum):
    CappedPower = "CappedPower"
    PlateauTail = "PlateauTail"


def _taper(x: np.ndarray, profile: Profile) -> np.ndarray:
    ramp = np.clip((x - 0.8) / 0.2, 0.0, 1.0)
    if profile is Profile.CappedPower:
        return np.where(ramp < 1.0, np.cos(0.5 * np.pi * ramp) ** 2, 0.0)
    return 1.0 - ramp


def build_initial_datum(
    params: ModelParams,
    grid: RadialGrid,
    r1: float,
    p: float,
    L: float,
    profile: Profile | str = Profile.CappedPower,
    a_max: float | None = None,
) -> RadialField:
    """Nonincreasing datum supported in B_r1 with u0 <= L r^-p and mass M0.

    The plateau height is found by root bracketing on the mass.
    """
    profile = Profile(profile)
    if not 0 < r1 < grid.R:
        raise ValueError(f"r1 must lie in (0, R), got {r1}")
    if L <= 0:
        raise ValueError("L must be positive")
    r = grid.centers
    shape = _taper(r / r1, profile)
    env = L * r ** (-p)
    V = grid.volumes

    def datum(A: float) -> np.ndarray:
        return np.minimum(A, env) * shape

    def mass_of(A: float) -> float:
        return float(np.dot(datum(A), V))

    A_top = float(env[shape > 0].max()) if np.any(shape > 0) else 0.0
    if a_max is not None:
        A_top = min(A_top, a_max)
    M0 = params.M0
    top = mass_of(A_top)
    if top < M0 * (1 - 1e-12):
        raise ValueError(f"mass target M0={M0} infeasible; maximal achievable mass {top:.6g}")
    A = brentq(lambda x: mass_of(x) - M0, 0.0, A_top, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    u = datum(A)
    u *= M0 / float(np.dot(u, V))  # remove the last ulp-level mismatch
    u = np.minimum(u, env)
    return RadialField(grid, u, 0.0)


@dataclass(frozen=True)
class Phi0Check:
    lhs: float
    rhs: float
    mass_inside: float
    precondition_ok: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def phi0_lower_bound(u0: RadialField, s0: float, gamma: float, eta: float = 0.5, M1: float | None = None) -> Phi0Check:
    """φ(s0, 0) against η² M1 s0^(2-γ) / ω; M1 defaults to the mass inside B_r1."""
    g = u0.grid
    w = to_mass_function(u0)
    r1n = (1 - eta) * s0
    mass_inside = g.omega * float(w.at(r1n))
    if M1 is None:
        M1 = mass_inside
    lhs = phi(w, MomentConfig(s0, gamma))
    rhs = eta**2 * M1 * s0 ** (2 - gamma) / g.omega
    return Phi0Check(lhs, rhs, mass_inside, mass_inside >= M1 * (1 - 1e-12))


# empirical constants ------------------------------------------------------


def fit_odi_constants(t, phi_vals, s0: float, gamma: float, theta: float) -> tuple[float, float]:
    """C1 by least squares of φ' against s0^(γ-3) φ², then the smallest C2 with
    φ' >= C1 s0^(γ-3) φ² - C2 s0^(3-γ-θ) at every interior sample."""
    t = np.asarray(t, dtype=float)
    ph = np.asarray(phi_vals, dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 samples")
    dphi = (ph[2:] - ph[:-2]) / (t[2:] - t[:-2])
    x = s0 ** (gamma - 3) * ph[1:-1] ** 2
    y = s0 ** (3 - gamma - theta)
    A = np.column_stack([x, -np.full_like(x, y)])
    coef, *_ = np.linalg.lstsq(A, dphi, rcond=None)
    C1 = float(coef[0]) if coef[0] > 0 else float(np.finfo(float).tiny)
    C2 = max(float(np.max((C1 * x - dphi) / y)), 1e-12)
    return C1, C2
