"""Decoupled antiphase-cluster states in rings of phase-amplitude oscillators.

Simulation, symmetry reduction and linear/Floquet stability of the state in
which next-nearest neighbours are exactly antiphase, so that nearest-neighbour
coupling cancels and every node runs as if isolated.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    AmplitudeUnderflow,
    BadRingSize,
    ConfigError,
    ConvergenceError,
    DetunedSystem,
    InadmissibleCoupling,
    NonFiniteFlow,
    RingError,
    WavenumberOutOfRange,
    ZeroDetuning,
)
from .integrate import Trajectory, integrate_orbit, monodromy, rk4_step
from .model import EPS_AMP, RingParams, RingState, rhs_complex, rhs_polar
from .stability import (
    RATE_SCALE,
    PhaseOnlyModel,
    PhaseVerdict,
    StabilityVerdict,
    block_dk,
    eigenvalues_closed_form,
    eigenvalues_numeric,
    floquet_block,
    jacobian_analytic,
    jacobian_numeric,
    phase_only_check,
    spectrum_alternating,
    spectrum_uniform,
)
from .symmetry import DecoupledPoint, SymmetryOp, decoupled_state, symmetry_basis

__all__ = [
    "AmplitudeUnderflow",
    "BadRingSize",
    "ConfigError",
    "ConvergenceError",
    "DecoupledPoint",
    "DetunedSystem",
    "EPS_AMP",
    "InadmissibleCoupling",
    "NonFiniteFlow",
    "PhaseOnlyModel",
    "PhaseVerdict",
    "RATE_SCALE",
    "RingError",
    "RingParams",
    "RingState",
    "StabilityVerdict",
    "SymmetryOp",
    "Trajectory",
    "WavenumberOutOfRange",
    "ZeroDetuning",
    "__version__",
    "block_dk",
    "decoupled_state",
    "eigenvalues_closed_form",
    "eigenvalues_numeric",
    "floquet_block",
    "integrate_orbit",
    "jacobian_analytic",
    "jacobian_numeric",
    "monodromy",
    "phase_only_check",
    "rhs_complex",
    "rhs_polar",
    "rk4_step",
    "spectrum_alternating",
    "spectrum_uniform",
    "symmetry_basis",
]
