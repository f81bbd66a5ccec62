"""Radial Keller–Segel blow-up laboratory: solvers, moment functionals and certificates."""

from .certificates import RiccatiWitness, assemble_certificate, build_initial_datum, riccati_blow_up_time, theta_for
from .functionals import MomentConfig, decompose_I, phi, psi
from .grid import MassFunction, RadialField, RadialGrid, build_grid, from_mass_function, to_mass_function
from .params import CoefficientFn, ModelParams, Variant, sphere_area, validate
from .regions import gamma_window, kappa_sup_jl, kappa_sup_main, kappa_sup_pe
from .solver import RunResult, Status, TimeStepper, check_cross, run, step_u, step_w

__all__ = [
    "CoefficientFn",
    "MassFunction",
    "ModelParams",
    "MomentConfig",
    "RadialField",
    "RadialGrid",
    "RiccatiWitness",
    "RunResult",
    "Status",
    "TimeStepper",
    "Variant",
    "assemble_certificate",
    "build_grid",
    "build_initial_datum",
    "check_cross",
    "decompose_I",
    "from_mass_function",
    "gamma_window",
    "kappa_sup_jl",
    "kappa_sup_main",
    "kappa_sup_pe",
    "phi",
    "psi",
    "riccati_blow_up_time",
    "run",
    "sphere_area",
    "step_u",
    "step_w",
    "theta_for",
    "to_mass_function",
    "validate",
]
