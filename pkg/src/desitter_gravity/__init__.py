"""
de Sitter Gravity - Core Module
Gravity as an SO(4,1) Yang-Mills gauge theory: algebra, lattice, field equations,
geodesics, post-Newtonian fields, radiation and cosmology.
"""

__version__ = "1.0.0"

from .algebra import AlgebraMode, GeneratorSet, build_generators, exp_map, verify_algebra
from .cosmology import CosmoParams, apparent_hubble, closed_form_desitter, closed_form_poincare, integrate_cosmology
from .exceptions import GravityError
from .field import AnalyticPotential, Grid, field_strength, solve_spherical, trace_action
from .geodesic import classic_tests, integrate_geodesic, light_deflection, perihelion_precession
from .lattice import LatticeGraph, convergence_study, wilson_action
from .matter import SpinPolarization, spin_tensor, stress_energy
from .post_newtonian import Body, assemble_1pn_field, post_keplerian_parameters
from .radiation import KeplerBinary, orbital_speedup, radiated_power_numeric
from .scenarios import RunReport, ScenarioConfig, ScenarioRunner, run_scenario

__all__ = [
    "AlgebraMode",
    "GeneratorSet",
    "build_generators",
    "exp_map",
    "verify_algebra",
    "SpinPolarization",
    "spin_tensor",
    "stress_energy",
    "LatticeGraph",
    "wilson_action",
    "convergence_study",
    "Grid",
    "AnalyticPotential",
    "field_strength",
    "trace_action",
    "solve_spherical",
    "integrate_geodesic",
    "perihelion_precession",
    "light_deflection",
    "classic_tests",
    "Body",
    "assemble_1pn_field",
    "post_keplerian_parameters",
    "KeplerBinary",
    "radiated_power_numeric",
    "orbital_speedup",
    "CosmoParams",
    "closed_form_desitter",
    "closed_form_poincare",
    "integrate_cosmology",
    "apparent_hubble",
    "ScenarioConfig",
    "ScenarioRunner",
    "RunReport",
    "run_scenario",
    "GravityError",
]
