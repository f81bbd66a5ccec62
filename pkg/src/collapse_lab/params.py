"""Problem description for the radial JL / PE chemotaxis systems.

Coefficient functions are black boxes evaluated on a finite validation grid;
Hoelder regularity of lambda, mu and u0 is the caller's responsibility and is
never checked here.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

VALIDATION_POINTS = 1024


class Variant(str, enum.Enum):
    JL = "JL"
    PE = "PE"


@dataclass(frozen=True)
class CoefficientFn:
    """Nonnegative radial coefficient: constant, power law c*r**exponent, or table."""

    kind: str = "constant"
    c: float = 0.0
    exponent: float = 0.0
    r: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("constant", "power", "table"):
            raise ValueError(f"unknown coefficient kind {self.kind!r}")
        if self.kind == "table":
            r = np.asarray(self.r, dtype=float)
            v = np.asarray(self.values, dtype=float)
            if r.size < 2 or r.shape != v.shape:
                raise ValueError("table coefficient needs matching r/values of length >= 2")
            if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
                raise ValueError("table coefficient samples must be finite")
            if np.any(np.diff(r) <= 0):
                raise ValueError("table coefficient grid must be strictly increasing")

    @classmethod
    def constant(cls, c: float) -> CoefficientFn:
        return cls("constant", c=float(c))

    @classmethod
    def power(cls, c: float, exponent: float) -> CoefficientFn:
        return cls("power", c=float(c), exponent=float(exponent))

    @classmethod
    def table(cls, r, values) -> CoefficientFn:
        return cls("table", r=tuple(float(x) for x in r), values=tuple(float(x) for x in values))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "constant":
            return np.full_like(r, self.c)
        if self.kind == "power":
            if self.exponent == 0:
                return np.full_like(r, self.c)
            return self.c * np.power(r, self.exponent)
        return np.interp(r, self.r, self.values)

    @property
    def is_zero(self) -> bool:
        if self.kind == "table":
            return not any(self.values)
        return self.c == 0.0

    def to_dict(self) -> dict[str, Any]:
        if self.kind == "constant":
            return {"kind": "constant", "c": self.c}
        if self.kind == "power":
            return {"kind": "power", "c": self.c, "exponent": self.exponent}
        return {"kind": "table", "r": list(self.r), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict[str, Any] | float) -> CoefficientFn:
        if isinstance(d, (int, float)):
            return cls.constant(d)
        kind = d.get("kind", "constant")
        if kind == "constant":
            return cls.constant(d["c"])
        if kind == "power":
            return cls.power(d["c"], d["exponent"])
        if kind == "table":
            return cls.table(d["r"], d["values"])
        raise ValueError(f"unknown coefficient kind {kind!r}")


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n."""
    if n < 1:
        raise ValueError(f"sphere_area needs n >= 1, got {n}")
    return n * math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class ModelParams:
    n: int
    R: float
    m: float
    kappa: float
    lambda_fn: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(0.0))
    mu_fn: CoefficientFn = field(default_factory=lambda: CoefficientFn.constant(0.0))
    alpha: float = 0.0
    mu1: float = 1.0
    lambda1: float | None = None
    M0: float = 1.0
    M1: float = 0.5
    variant: Variant = Variant.JL

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.lambda1 is None:
            r = validation_grid(self.R)
            object.__setattr__(self, "lambda1", float(np.max(self.lambda_fn(r))))

    @property
    def omega(self) -> float:
        return sphere_area(self.n)

    @property
    def volume(self) -> float:
        return self.omega * self.R**self.n / self.n

    def with_(self, **changes) -> ModelParams:
        if "lambda_fn" in changes and "lambda1" not in changes:
            changes["lambda1"] = None
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "R": self.R,
            "m": self.m,
            "kappa": self.kappa,
            "lambda": self.lambda_fn.to_dict(),
            "mu": self.mu_fn.to_dict(),
            "alpha": self.alpha,
            "mu1": self.mu1,
            "lambda1": self.lambda1,
            "M0": self.M0,
            "M1": self.M1,
            "variant": self.variant.value,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ModelParams:
        return cls(
            n=int(d["n"]),
            R=float(d["R"]),
            m=float(d["m"]),
            kappa=float(d["kappa"]),
            lambda_fn=CoefficientFn.from_dict(d.get("lambda", 0.0)),
            mu_fn=CoefficientFn.from_dict(d.get("mu", 0.0)),
            alpha=float(d.get("alpha", 0.0)),
            mu1=float(d.get("mu1", 1.0)),
            lambda1=None if d.get("lambda1") is None else float(d["lambda1"]),
            M0=float(d.get("M0", 1.0)),
            M1=float(d.get("M1", 0.5)),
            variant=Variant(d.get("variant", "JL")),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> ModelParams:
        return cls.from_dict(json.loads(Path(path).read_text()))


def validation_grid(R: float) -> np.ndarray:
    return np.linspace(0.0, R, VALIDATION_POINTS)


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate(params: ModelParams) -> ValidationReport:
    """List every violated standing hypothesis (empty report iff valid)."""
    out: list[str] = []
    p = params
    if p.n < 3:
        out.append("n ≥ 3")
    if not p.R > 0:
        out.append("R > 0")
    if not p.m > 0:
        out.append("m > 0")
    if not p.kappa >= 0:
        out.append("κ ≥ 0")
    if not p.alpha >= 0:
        out.append("α ≥ 0")
    if not p.mu1 > 0:
        out.append("μ₁ > 0")
    if not 0 < p.M1 < p.M0:
        out.append("0 < M₁ < M₀")
    if p.R > 0:
        r = validation_grid(p.R)
        lam = p.lambda_fn(r)
        mu = p.mu_fn(r)
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            out.append("λ ≥ 0")
        if np.any(mu < 0) or not np.all(np.isfinite(mu)):
            out.append("μ ≥ 0")
        with np.errstate(divide="ignore", invalid="ignore"):
            envelope = p.mu1 * np.power(r, p.alpha)
        bad = mu > envelope * (1 + 1e-12) + 1e-300
        if np.any(bad):
            r_bad = float(r[np.argmax(bad)])
            out.append(f"μ(r) ≤ μ₁ r^α (first failure at r={r_bad:.6g})")
        if np.any(lam > p.lambda1 * (1 + 1e-12)):
            out.append("λ(r) ≤ λ₁")
    return ValidationReport(tuple(out))
