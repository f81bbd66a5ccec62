"""Moment functionals phi, psi and the four-term lower bound for phi'.

The weight s^(-gamma) (s0 - s) is unbounded at the origin, so it is never
sampled: every integral is assembled cell by cell from exact power moments
against a piecewise-linear integrand (product integration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .grid import MassFunction, RadialField, RadialGrid, to_mass_function
from .params import ModelParams, Variant


@dataclass(frozen=True)
class MomentConfig:
    s0: float
    gamma: float

    def __post_init__(self) -> None:
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.s0 > 0:
            raise ValueError(f"s0 must be positive, got {self.s0}")


@dataclass(frozen=True)
class MomentSample:
    t: float
    phi: float
    psi: float
    I1: float
    I2: float
    I3: float
    I4: float
    variant: Variant = Variant.JL

    @property
    def I_sum(self) -> float:
        return self.I1 + self.I2 + self.I3 + self.I4


def beta(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def beta_moment(a_exp: float, b_exp: float, s0: float) -> float:
    """int_0^s0 s^a (s0-s)^b ds = B(a+1, b+1) s0^(a+b+1)."""
    if a_exp <= -1 or b_exp <= -1:
        raise ValueError(f"exponents must exceed -1, got a={a_exp}, b={b_exp}")
    if s0 <= 0:
        raise ValueError("s0 must be positive")
    return beta(a_exp + 1, b_exp + 1) * s0 ** (a_exp + b_exp + 1)


def power_integral(lo, hi, e: float) -> np.ndarray:
    """Vectorised int_lo^hi s^e ds for e > -1 and 0 <= lo <= hi."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    qe = e + 1.0
    if qe <= 0:
        raise ValueError(f"power {e} is not integrable at the origin")
    out = np.empty(np.broadcast(lo, hi).shape)
    lo, hi = np.broadcast_arrays(lo, hi)
    # narrow cells away from 0 need b^q - a^q without cancellation
    near = (lo > 0) & (hi - lo < lo)
    out[~near] = (hi[~near] ** qe - lo[~near] ** qe) / qe
    a, b = lo[near], hi[near]
    out[near] = a**qe * np.expm1(qe * np.log1p((b - a) / a)) / qe
    return out


def cell_linear_integral(lo, hi, f_lo, f_hi, s0: float, e: float) -> float:
    """sum over cells of int s^e (s0 - s) f(s) ds, f linear on each cell."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    slope = (np.asarray(f_hi) - np.asarray(f_lo)) / (hi - lo)
    icpt = np.asarray(f_lo) - slope * lo
    P0 = power_integral(lo, hi, e)
    P1 = power_integral(lo, hi, e + 1)
    P2 = power_integral(lo, hi, e + 2)
    # s^e (s0-s)(icpt + slope s)
    total = icpt * s0 * P0 + (slope * s0 - icpt) * P1 - slope * P2
    return float(np.sum(total))


def _cells_upto(w: MassFunction, s0: float):
    """Cells of [0, s0] with s0 inserted as an extra node (w stays exact)."""
    s = w.grid.s
    if not 0 < s0 <= s[-1] * (1 + 1e-14):
        raise ValueError(f"s0={s0} outside (0, R^n]")
    J = int(np.searchsorted(s, s0, side="left"))
    J = min(J, s.size - 1)
    if np.isclose(s[J], s0, rtol=1e-13, atol=0):
        nodes = s[: J + 1].copy()
        wv = w.w[: J + 1].copy()
        nodes[-1] = s0
    else:
        nodes = np.concatenate([s[:J], [s0]])
        wv = np.concatenate([w.w[:J], [w.at(s0)]])
    return nodes[:-1], nodes[1:], wv[:-1], wv[1:], w.ws[: nodes.size - 1]


def snap_s0(grid: RadialGrid, s0: float) -> tuple[int, float]:
    """Nearest interior s-grid node to s0."""
    j = int(np.argmin(np.abs(grid.s - s0)))
    j = min(max(j, 1), grid.N)
    return j, float(grid.s[j])


def phi(w: MassFunction, cfg: MomentConfig) -> float:
    lo, hi, wl, wh, _ = _cells_upto(w, cfg.s0)
    return cell_linear_integral(lo, hi, wl, wh, cfg.s0, -cfg.gamma)


def psi(w: MassFunction, cfg: MomentConfig) -> float:
    lo, hi, wl, wh, ws = _cells_upto(w, cfg.s0)
    return cell_linear_integral(lo, hi, wl * ws, wh * ws, cfg.s0, -cfg.gamma)


def product_integrate(nodes, values, s0: float, a: float, b: float) -> float:
    """int_0^s0 s^a (s0-s)^b f(s) ds for f piecewise linear on ``nodes``.

    Each cell is integrated by QUADPACK's algebraic-singularity rule, so the
    end cells carry the s^a and (s0-s)^b singularities in the weight.
    Independent of the Beta-function route.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes[0] != 0 or not np.isclose(nodes[-1], s0):
        raise ValueError("nodes must span [0, s0]")
    last = nodes.size - 2
    total = 0.0
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=200)
    for i in range(nodes.size - 1):
        lo, hi = nodes[i], nodes[i + 1]
        fl, fh = values[i], values[i + 1]

        def f(x, lo=lo, hi=hi, fl=fl, fh=fh):
            return fl + (fh - fl) * (x - lo) / (hi - lo)

        if i == 0 and i == last:
            val = integrate.quad(f, lo, hi, weight="alg", wvar=(a, b), **opts)[0]
        elif i == 0:
            val = integrate.quad(lambda x: f(x) * (s0 - x) ** b, lo, hi, weight="alg", wvar=(a, 0.0), **opts)[0]
        elif i == last:
            val = integrate.quad(lambda x: f(x) * x**a, lo, hi, weight="alg", wvar=(0.0, b), **opts)[0]
        else:
            val = integrate.quad(lambda x: f(x) * x**a * (s0 - x) ** b, lo, hi, **opts)[0]
        total += val
    return total


def decompose_I(
    w: MassFunction,
    cfg: MomentConfig,
    params: ModelParams,
    Mbar: float | None = None,
    z: np.ndarray | None = None,
) -> tuple[float, float, float, float]:
    """Diffusion, aggregation, signal and damping parts of the phi' bound.

    s0 is snapped to the nearest s-grid node. JL needs ``Mbar``; PE needs ``z``
    on the s-grid.
    """
    g = w.grid
    n, gam = g.n, cfg.gamma
    J, s0 = snap_s0(g, cfg.s0)
    s = g.s
    lo, hi = s[:J], s[1 : J + 1]
    slope = w.ws[:J]
    wl, wh = w.w[:J], w.w[1 : J + 1]

    # diffusive flux n^2 s^(2-2/n) D w_ss at nodes; zero at the origin
    ws_all = w.ws
    D_cell = (n * ws_all + 1.0) ** (params.m - 1.0)
    h = np.zeros(g.N + 1)
    j = np.arange(1, g.N)
    wss = (ws_all[j] - ws_all[j - 1]) / (0.5 * (s[j + 1] - s[j - 1]))
    h[j] = n**2 * s[j] ** (2 - 2 / n) * 0.5 * (D_cell[j] + D_cell[j - 1]) * wss
    I1 = cell_linear_integral(lo, hi, h[:J], h[1 : J + 1], s0, -gam)

    psi_val = cell_linear_integral(lo, hi, wl * slope, wh * slope, s0, -gam)
    I2 = n * psi_val

    if Variant(params.variant) is Variant.JL:
        if Mbar is None:
            Mbar = n * w.w[-1] / g.R**n
        I3 = -Mbar * cell_linear_integral(lo, hi, slope, slope, s0, 1 - gam)
    else:
        if z is None:
            raise ValueError("PE decomposition needs z on the s-grid")
        I3 = -n * cell_linear_integral(lo, hi, slope * z[:J], slope * z[1 : J + 1], s0, -gam)

    if params.mu1 == 0:
        I4 = 0.0
    else:
        inner = np.maximum(slope, 0.0) ** (1 + params.kappa) * power_integral(lo, hi, params.alpha / n)
        Q = np.concatenate([[0.0], np.cumsum(inner)])
        I4 = -(n**params.kappa) * params.mu1 * cell_linear_integral(lo, hi, Q[:-1], Q[1:], s0, -gam)
    return I1, I2, I3, I4


def c_phi_psi(gamma: float) -> float:
    """Constant in phi <= C s0^((3-gamma)/2) sqrt(psi)."""
    return math.sqrt(2.0) * beta(1 - gamma / 2, 0.5)


def c_aggregation(n: int, gamma: float) -> float:
    """Constant in n psi >= C s0^(gamma-3) phi^2."""
    return n / (2.0 * beta(1 - gamma / 2, 0.5) ** 2)


def check_w_psi_bound(w: MassFunction, cfg: MomentConfig) -> float:
    """min over grid nodes in (0, s0) of sqrt(2) s^(g/2) (s0-s)^(-1/2) sqrt(psi) - w."""
    psi_val = max(psi(w, cfg), 0.0)
    s = w.grid.s
    inside = (s > 0) & (s < cfg.s0)
    if not np.any(inside):
        return 0.0
    ss = s[inside]
    rhs = math.sqrt(2.0) * ss ** (cfg.gamma / 2) / np.sqrt(cfg.s0 - ss) * math.sqrt(psi_val)
    return float(np.min(rhs - w.w[inside]))


def check_phi_psi_bound(phi_val: float, psi_val: float, cfg: MomentConfig) -> float:
    rhs = c_phi_psi(cfg.gamma) * cfg.s0 ** ((3 - cfg.gamma) / 2) * math.sqrt(max(psi_val, 0.0))
    return rhs - phi_val


def sample_moments(u: RadialField, cfg: MomentConfig, params: ModelParams) -> MomentSample:
    """phi, psi and I1..I4 for one snapshot (s0 snapped to the grid)."""
    from .elliptic import solve_pe_signal

    g = u.grid
    w = to_mass_function(u)
    _, s0 = snap_s0(g, cfg.s0)
    snapped = MomentConfig(s0, cfg.gamma)
    variant = Variant(params.variant)
    if variant is Variant.JL:
        I = decompose_I(w, snapped, params, Mbar=g.n * w.w[-1] / g.R**g.n)
    else:
        I = decompose_I(w, snapped, params, z=solve_pe_signal(u).z)
    return MomentSample(u.t, phi(w, snapped), I[1] / g.n, *I, variant=variant)
