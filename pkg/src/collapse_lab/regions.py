"""Exact parameter-admissibility regions for finite-time blow-up.

All quantities are :class:`fractions.Fraction`; floats passed in are converted
exactly (so pass strings like ``"1/3"`` or Fractions when the decimal matters).
Intervals are open and membership uses strict inequalities.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Rational = Union[Fraction, int, str, float]

ZERO = Fraction(0)
ONE = Fraction(1)


class Branch(str, enum.Enum):
    LargeM = "LargeM"
    SmallM = "SmallM"
    PE = "PE"


def q(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12) if x != int(x) else Fraction(int(x))
    return Fraction(x)


def pos(x: Fraction) -> Fraction:
    return x if x > 0 else ZERO


@dataclass(frozen=True)
class KappaBound:
    sup_kappa: Fraction
    branch: Branch
    empty: bool
    reason: str = ""

    def admits(self, kappa: Rational) -> bool:
        k = q(kappa)
        return not self.empty and ZERO <= k < self.sup_kappa


@dataclass(frozen=True)
class GammaWindow:
    lower: Fraction
    upper: Fraction
    branch: Branch
    reason: str = ""

    @property
    def empty(self) -> bool:
        return not self.lower < self.upper

    @property
    def midpoint(self) -> Fraction:
        return (self.lower + self.upper) / 2

    def __contains__(self, gamma: Rational) -> bool:
        g = q(gamma)
        return self.lower < g < self.upper


def _bound(sup: Fraction, branch: Branch, reason: str = "") -> KappaBound:
    empty = sup <= 0
    if empty and not reason:
        reason = "supremum of κ is not positive"
    return KappaBound(sup, branch, empty, reason)


def main_branch(m: Rational, p: Rational) -> Branch:
    return Branch.LargeM if q(m) >= 2 / q(p) else Branch.SmallM


def kappa_sup_main(n: Rational, m: Rational, p: Rational, alpha: Rational = 0) -> KappaBound:
    """Supremum of admissible κ given a pointwise upper estimate u <= K|x|^-p."""
    n, m, p, alpha = q(n), q(m), q(p), q(alpha)
    if n < 3 or m <= 0 or alpha < 0:
        raise ValueError(f"need n >= 3, m > 0, alpha >= 0 (got n={n}, m={m}, alpha={alpha})")
    if p < n:
        raise ValueError(f"need p >= n (got p={p}, n={n})")
    branch = main_branch(m, p)
    if m >= 1 + (n - 2) / p:
        return KappaBound(ZERO, branch, True, "m < 1 + (n−2)/p fails")
    if branch is Branch.LargeM:
        sup = alpha / p + min(n / (2 * p), (n - 2) / p - pos(m - 1))
    else:
        sup = alpha / p + min(n / (2 * p), (n - 1) / p - m / 2)
    return _bound(sup, branch)


def kappa_sup_jl(n: Rational, m: Rational, alpha: Rational = 0) -> KappaBound:
    n, m = q(n), q(m)
    if m >= (2 * n - 2) / n:
        return KappaBound(ZERO, main_branch(m, n), True, "m < (2n−2)/n fails")
    return kappa_sup_main(n, m, n, alpha)


def pe_exponent_p0(n: Rational, m: Rational) -> Fraction:
    """Critical decay exponent n(n-1)/((m-1)n+1) of the PE pointwise estimate."""
    n, m = q(n), q(m)
    if n < 3 or m < 1 or m >= (2 * n - 2) / n:
        raise ValueError(f"need n >= 3 and 1 <= m < (2n-2)/n (got n={n}, m={m})")
    p0 = n * (n - 1) / ((m - 1) * n + 1)
    assert p0 >= n
    return p0


def kappa_sup_pe(n: Rational, m: Rational, alpha: Rational = 0) -> KappaBound:
    """Supremum of κ for PE; equals kappa_sup_main evaluated at p = p0.

    Strict admissibility at p0 carries over to some p > p0 by continuity in p.
    """
    n, m, alpha = q(n), q(m), q(alpha)
    if m < 1:
        raise ValueError(f"PE region needs m >= 1 (got m={m})")
    if n < 3 or alpha < 0:
        raise ValueError(f"need n >= 3, alpha >= 0 (got n={n}, alpha={alpha})")
    if m >= (2 * n - 2) / n:
        return KappaBound(ZERO, Branch.PE, True, "m < (2n−2)/n fails")
    d = (m - 1) * n + 1
    sup = alpha * d / (n * (n - 1)) + min(d / (2 * (n - 1)), (n - 2 - (m - 1) * n) / (n * (n - 1)))
    return _bound(sup, Branch.PE)


def gamma_window(n: Rational, m: Rational, p: Rational, kappa: Rational, alpha: Rational = 0) -> GammaWindow:
    """Open interval of moment exponents γ for which the ODI closes."""
    n, m, p, kappa, alpha = q(n), q(m), q(p), q(kappa), q(alpha)
    bound = kappa_sup_main(n, m, p, alpha)
    branch = bound.branch
    if bound.empty or not ZERO <= kappa < bound.sup_kappa:
        return GammaWindow(ZERO, ZERO, branch, f"κ={kappa} outside [0, {bound.sup_kappa})")
    damp = 2 * p * kappa / n - 2 * alpha / n
    if branch is Branch.LargeM:
        P = p / n * pos(m - 1)
        lo = max(ZERO, damp, 1 - 2 / n - P)
        hi = min(2 - 4 / n - 2 * P, ONE)
    else:
        lo = max(ZERO, damp)
        hi = min(2 - 2 / n - p * m / n, ONE)
    return GammaWindow(lo, hi, branch)


def table1(dims=range(3, 11)) -> list[tuple[str, Fraction]]:
    """Present-article κ suprema at m = 1, α = 0 for both systems."""
    rows = []
    for n in dims:
        rows.append((f"n={n},m=1,JL", kappa_sup_jl(n, 1).sup_kappa))
        rows.append((f"n={n},m=1,PE", kappa_sup_pe(n, 1).sup_kappa))
    return rows


def table1_csv(dims=range(3, 11)) -> str:
    lines = ["n,m,variant,kappa_sup,kappa_sup_float"]
    for n in dims:
        for variant, fn in (("JL", kappa_sup_jl), ("PE", kappa_sup_pe)):
            k = fn(n, 1).sup_kappa
            lines.append(f"{n},1,{variant},{k},{float(k):.17g}")
    return "\n".join(lines) + "\n"


def region_verdict(n, m, kappa, alpha=0, p=None, variant: str = "JL") -> dict:
    """Admissibility verdict as a JSON-ready dict."""
    n_, m_, kappa_, alpha_ = q(n), q(m), q(kappa), q(alpha)
    variant = variant.upper()
    if p is not None:
        p_ = q(p)
        bound = kappa_sup_main(n_, m_, p_, alpha_)
    elif variant == "PE":
        bound = kappa_sup_pe(n_, m_, alpha_)
        p_ = pe_exponent_p0(n_, m_) if not bound.empty else None
    else:
        bound = kappa_sup_jl(n_, m_, alpha_)
        p_ = n_
    admissible = bound.admits(kappa_)
    window = gamma_window(n_, m_, p_, kappa_, alpha_) if admissible and p_ is not None else None
    return {
        "admissible": admissible,
        "kappa_sup": str(bound.sup_kappa),
        "kappa_sup_float": float(bound.sup_kappa),
        "gamma_window": None if window is None else [str(window.lower), str(window.upper)],
        "branch": bound.branch.value,
        "p": None if p_ is None else str(p_),
        "reason": bound.reason,
    }
