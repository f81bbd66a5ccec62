"""Signal gradients: closed form for JL, a conservative tridiagonal solve for PE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .grid import MassFunction, RadialField, RadialGrid, mass, to_mass_function
from .params import Variant


@dataclass(frozen=True, eq=False)
class SignalGradient:
    vr: np.ndarray  # at the N+1 faces
    variant: Variant


@dataclass(frozen=True, eq=False)
class PESignal:
    v: np.ndarray  # cell centers
    vr: np.ndarray  # faces
    z: np.ndarray  # s-grid nodes


def vr_jl(w: MassFunction, Mbar: float) -> SignalGradient:
    """v_r = (r/n) M-bar - r^(1-n) w(r^n) at every face."""
    g = w.grid
    r = g.faces
    vr = np.zeros_like(r)
    inner = r[1:-1]
    vr[1:-1] = inner * Mbar / g.n - w.w[1:-1] / inner ** (g.n - 1)
    return SignalGradient(vr, Variant.JL)


def pe_matrix(g: RadialGrid) -> np.ndarray:
    # rows: V_i v_i + sum of face conductances = V_i u_i
    cond = g.areas[1:-1] / g.center_gaps  # interior faces
    ab = np.zeros((3, g.N))
    diag = g.volumes.copy()
    diag[:-1] += cond
    diag[1:] += cond
    ab[1] = diag
    ab[0, 1:] = -cond
    ab[2, :-1] = -cond
    return ab


def solve_pe_signal(u: RadialField) -> PESignal:
    """Solve 0 = Δv - v + u with homogeneous Neumann data."""
    return solve_pe_values(u.grid, u.values)


def solve_pe_values(g: RadialGrid, values: np.ndarray, ab: np.ndarray | None = None) -> PESignal:
    """Same solve for an arbitrary finite source (signed sources allowed).

    ``ab`` may hold the banded operator of ``g`` when solving repeatedly.
    """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("PE source must be finite")
    if ab is None:
        ab = pe_matrix(g)
    # constants solve the homogeneous part exactly, so only the deviation
    # from the (clamped) mean goes through the banded solve
    mean = float(np.dot(values, g.volumes)) / float(g.volumes.sum())
    mean = min(max(mean, values.min()), values.max())
    dv = solve_banded((1, 1), ab, g.volumes * (values - mean), check_finite=False)
    v = mean + dv
    vr = np.zeros(g.N + 1)
    vr[1:-1] = np.diff(dv) / g.center_gaps
    z = np.concatenate([[0.0], np.cumsum(v * g.ds / g.n)])
    return PESignal(v, vr, z)


def signal_gradient(u: RadialField, variant: Variant) -> tuple[np.ndarray, np.ndarray | None]:
    """Face values of v_r for either system, plus z on the s-grid for PE."""
    if Variant(variant) is Variant.JL:
        w = to_mass_function(u)
        Mbar = mass(u) / u.grid.ball_volume
        return vr_jl(w, Mbar).vr, None
    sig = solve_pe_signal(u)
    return sig.vr, sig.z


def vr_bound_pe(u: RadialField) -> float:
    """max over faces of r^(n-1) v_r for the PE signal."""
    g = u.grid
    sig = solve_pe_signal(u)
    return float(np.max(g.faces ** (g.n - 1) * sig.vr))


def pe_gradient_envelope(M0: float, lambda1: float, T: float, omega: float) -> float:
    """Reference value 2 e^{λ1 T} M0 / ω for r^(n-1) v_r under PE."""
    return 2.0 * np.exp(lambda1 * T) * M0 / omega
