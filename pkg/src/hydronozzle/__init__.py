"""Steady hydrostatic Euler flows in infinitely long nozzles.

Stream-function reduction to per-slice two-point problems, three slice
solvers (Lagrange quadrature, relaxed Picard, shooting), reconstruction of
velocity and pressure, streamline kinematics and invariant checks.
"""
from .analysis import (Counterexample, FarFieldState, convergence_report, farfield_state,
                       liouville_check, residuals)
from .field import FlowField, StreamFunctionField, assemble, mass_flux_at, reconstruct
from .geometry import Flat, NozzleGeometry, Slanted, flatten, make_geometry, validate_assumptions
from .kinematics import FlowInterpolant, PathTrace, gradient_flow_curve, trace_streamline
from .lagrange import LagrangeSlice, build_lagrange_slice, dPhi_dz1, invert_to_slice, solve_beta
from .profiles import (IncomingProfile, VorticitySource, build_profile, kappa, source_from_function,
                       vorticity_source)
from .slice_solver import SliceSolution, apply_T, check_slice, picard_solve, shooting_solve

__version__ = "0.1.0"

__all__ = [
    "Counterexample", "FarFieldState", "Flat", "FlowField", "FlowInterpolant", "IncomingProfile",
    "LagrangeSlice", "NozzleGeometry", "PathTrace", "Slanted", "SliceSolution",
    "StreamFunctionField", "VorticitySource", "apply_T", "assemble", "build_lagrange_slice",
    "build_profile", "check_slice", "convergence_report", "dPhi_dz1", "farfield_state",
    "flatten", "gradient_flow_curve", "invert_to_slice", "kappa", "liouville_check",
    "make_geometry", "mass_flux_at", "picard_solve", "reconstruct", "residuals",
    "shooting_solve", "solve_beta", "source_from_function", "trace_streamline",
    "validate_assumptions", "vorticity_source",
]
