"""Radial finite-volume grids, fields, and the mass-accumulation transform.

u is piecewise constant per cell, so on the s = r**n grid its cumulative mass
w(s) = int_0^{s^(1/n)} rho^(n-1) u drho is exactly piecewise linear with
slope u_i / n on cell i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .params import sphere_area


@dataclass(frozen=True, eq=False)
class RadialGrid:
    faces: np.ndarray
    n: int
    kind: str = "uniform"

    def __post_init__(self) -> None:
        f = self.faces
        if f[0] != 0.0 or np.any(np.diff(f) <= 0):
            raise ValueError("faces must start at 0 and be strictly increasing")

    @property
    def N(self) -> int:
        return self.faces.size - 1

    @property
    def R(self) -> float:
        return float(self.faces[-1])

    @cached_property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.faces[1:] + self.faces[:-1])

    @cached_property
    def widths(self) -> np.ndarray:
        return np.diff(self.faces)

    @cached_property
    def omega(self) -> float:
        return sphere_area(self.n)

    @cached_property
    def s(self) -> np.ndarray:
        """Mass-variable nodes s_j = r_{j+1/2}**n, j = 0..N."""
        return self.faces**self.n

    @cached_property
    def ds(self) -> np.ndarray:
        return np.diff(self.s)

    @cached_property
    def volumes(self) -> np.ndarray:
        return self.omega / self.n * self.ds

    @cached_property
    def areas(self) -> np.ndarray:
        """Face areas omega * r**(n-1) at all N+1 faces."""
        return self.omega * self.faces ** (self.n - 1)

    @cached_property
    def center_gaps(self) -> np.ndarray:
        """Distances between adjacent cell centers (interior faces 1..N-1)."""
        return np.diff(self.centers)

    @property
    def dr_min(self) -> float:
        return float(self.widths.min())

    @property
    def ball_volume(self) -> float:
        return self.omega * self.R**self.n / self.n


def build_grid(N: int, R: float, n: int, kind: str = "uniform", ratio: float = 0.95) -> RadialGrid:
    """Uniform grid, or one graded geometrically toward the origin.

    For ``kind="graded"`` consecutive widths grow outward by 1/ratio, so the
    smallest cell touches r = 0.
    """
    if N < 8:
        raise ValueError(f"need at least 8 cells, got N={N}")
    if R <= 0:
        raise ValueError("R must be positive")
    kind = kind.lower()
    if kind == "uniform":
        faces = R * np.arange(N + 1) / N
    elif kind in ("graded", "gradedtoorigin"):
        if not 0 < ratio < 1:
            raise ValueError("grading ratio must lie in (0, 1)")
        w = ratio ** np.arange(N - 1, -1, -1, dtype=float)
        faces = np.concatenate([[0.0], np.cumsum(w)])
        faces *= R / faces[-1]
        kind = "graded"
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    faces[-1] = R
    return RadialGrid(faces, int(n), kind)


@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.N,):
            raise ValueError(f"expected {self.grid.N} cell values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(v < 0):
            raise ValueError("field values must be nonnegative")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: RadialGrid, fn, t: float = 0.0) -> RadialField:
        return cls(grid, np.asarray(fn(grid.centers), dtype=float), t)

    @property
    def sup(self) -> float:
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class MassFunction:
    grid: RadialGrid
    w: np.ndarray
    ws: np.ndarray = field(repr=False)
    t: float = 0.0

    @property
    def s(self) -> np.ndarray:
        return self.grid.s

    def at(self, s) -> np.ndarray:
        """Exact evaluation of the piecewise-linear w at arbitrary s."""
        return np.interp(s, self.grid.s, self.w)


def to_mass_function(u: RadialField) -> MassFunction:
    g = u.grid
    cell = u.values * g.ds / g.n
    w = np.concatenate([[0.0], np.cumsum(cell)])
    return MassFunction(g, w, u.values / g.n, u.t)


def from_mass_function(w: MassFunction) -> RadialField:
    """Inverse transform: u_i = n * (cell slope of w)."""
    g = w.grid
    u = g.n * np.diff(w.w) / g.ds
    return RadialField(g, np.maximum(u, 0.0), w.t)


def mass(u: RadialField) -> float:
    return float(np.dot(u.values, u.grid.volumes))


def mean_mass(u: RadialField) -> float:
    """Spatial mean M-bar = mass / |ball|."""
    return mass(u) / u.grid.ball_volume
