"""JSON run configurations and initial-datum recipes."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .certificates import Profile, build_initial_datum
from .functionals import MomentConfig
from .grid import RadialField, RadialGrid, build_grid
from .params import ModelParams, Variant
from .regions import gamma_window, kappa_sup_pe, pe_exponent_p0, q
from .solver import TimeStepper

PROFILES = ("constant", "cosine", "gaussian", "CappedPower", "PlateauTail")


@dataclass(frozen=True)
class GridSpec:
    N: int = 256
    kind: str = "uniform"
    ratio: float = 0.95

    def build(self, params: ModelParams) -> RadialGrid:
        return build_grid(self.N, params.R, params.n, self.kind, self.ratio)


@dataclass
class RunConfig:
    params: ModelParams
    grid: GridSpec = field(default_factory=GridSpec)
    stepper: TimeStepper = field(default_factory=TimeStepper)
    initial: dict = field(default_factory=lambda: {"profile": "cosine", "base": 1.0, "amplitude": 2.0})
    T: float = 0.05
    output_every: float | None = None
    snapshot_every: int = 1
    moments: dict | None = field(default_factory=lambda: {"s0": "half", "gamma": "auto"})
    certificate: dict | None = None
    monitor: dict = field(default_factory=dict)
    seed: int = 0
    name: str = ""
    expect: str = ""

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> RunConfig:
        d = copy.deepcopy(d)
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        params = ModelParams.from_dict(d.pop("params"))
        grid = GridSpec(**d.pop("grid", {}))
        stepper = TimeStepper.from_dict(d.pop("stepper", {}))
        return cls(params=params, grid=grid, stepper=stepper, **d)

    @classmethod
    def from_json(cls, path: str | Path) -> RunConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "params": self.params.to_dict(),
            "grid": {"N": self.grid.N, "kind": self.grid.kind, "ratio": self.grid.ratio},
            "stepper": self.stepper.to_dict(),
            "initial": self.initial,
            "T": self.T,
            "output_every": self.output_every,
            "snapshot_every": self.snapshot_every,
            "moments": self.moments,
            "certificate": self.certificate,
            "monitor": self.monitor,
            "seed": self.seed,
            "expect": self.expect,
        }

    def with_value(self, axis: str, value) -> RunConfig:
        """Copy with one numeric field replaced; ``axis`` may be dotted (grid.N)."""
        d = self.to_dict()
        parts = axis.split(".")
        if len(parts) == 1:
            if parts[0] in d["params"] and parts[0] not in ("variant", "lambda", "mu"):
                target, key = d["params"], parts[0]
            elif parts[0] in ("T", "output_every", "seed"):
                target, key = d, parts[0]
            else:
                raise ValueError(f"unknown sweep axis {axis!r}")
        else:
            target = d
            for p in parts[:-1]:
                if not isinstance(target.get(p), dict):
                    raise ValueError(f"unknown sweep axis {axis!r}")
                target = target[p]
            key = parts[-1]
            if key not in target:
                raise ValueError(f"unknown sweep axis {axis!r}")
        old = target[key]
        if isinstance(old, bool) or (old is not None and not isinstance(old, (int, float))):
            raise ValueError(f"sweep axis {axis!r} is not numeric")
        target[key] = value
        if key == "M0" and "M1" in target and target["M1"] >= value:
            target["M1"] = 0.5 * value
        return RunConfig.from_dict(d)

    # derived pieces ---------------------------------------------------
    def build_grid(self) -> RadialGrid:
        return self.grid.build(self.params)

    def decay_exponent(self) -> Fraction:
        """p used for windows and envelopes: n for JL, p0 for PE."""
        p = self.monitor.get("p")
        if p is not None:
            return q(p)
        if Variant(self.params.variant) is Variant.JL:
            return q(self.params.n)
        n, m = q(self.params.n), q(self.params.m)
        if kappa_sup_pe(n, m).empty:
            return q(self.params.n)
        return pe_exponent_p0(n, m)

    def moment_config(self) -> MomentConfig | None:
        if self.moments is None:
            return None
        s0 = self.moments.get("s0", "half")
        if s0 == "half":
            s0 = 0.5 * self.params.R**self.params.n
        gamma = self.moments.get("gamma", "auto")
        if gamma == "auto":
            gamma = auto_gamma(self.params, self.decay_exponent())
        return MomentConfig(float(s0), float(gamma))


def auto_gamma(params: ModelParams, p) -> float:
    """Window midpoint when the exponents are admissible, else 1/2."""
    try:
        w = gamma_window(params.n, q(params.m), q(p), q(params.kappa), q(params.alpha))
    except ValueError:
        return 0.5
    return 0.5 if w.empty else float(w.midpoint)


def initial_field(cfg: RunConfig, grid: RadialGrid) -> RadialField:
    recipe = dict(cfg.initial)
    profile = recipe.pop("profile", "cosine")
    noise = float(recipe.pop("noise", 0.0))
    r = grid.centers
    R = grid.R
    if profile == "constant":
        u = np.full(grid.N, float(recipe.get("value", 1.0)))
    elif profile == "cosine":
        u = recipe.get("base", 1.0) + recipe.get("amplitude", 1.0) * 0.5 * (1 + np.cos(np.pi * r / R))
    elif profile == "gaussian":
        u = recipe.get("base", 0.0) + recipe.get("amplitude", 1.0) * np.exp(-((r / recipe.get("width", 0.2)) ** 2))
    elif profile in ("CappedPower", "PlateauTail"):
        p = float(recipe.get("p", cfg.decay_exponent()))
        field_ = build_initial_datum(cfg.params, grid, float(recipe["r1"]), p, float(recipe["L"]), Profile(profile), recipe.get("a_max"))
        u = field_.values
    else:
        raise ValueError(f"unknown initial profile {profile!r}; choose from {PROFILES}")
    if noise > 0:
        rng = np.random.default_rng(cfg.seed)
        u = u * (1.0 + noise * rng.uniform(-1.0, 1.0, grid.N))
    if recipe.get("normalize", False):
        u = u * cfg.params.M0 / float(np.dot(u, grid.volumes))
    return RadialField(grid, np.maximum(u, 0.0), 0.0)
