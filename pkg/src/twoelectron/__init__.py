"""Exact two-electron scattering on tight-binding impurity lattices.

Two models are covered: two parallel conductors whose dots interact
capacitively, and an interacting dot side-coupled to a single wire.
"""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, DomainError, NumericError, ResonanceError
from .lattice import ImpurityChain, ParallelModel, SideDot, SideDotModel
from .observables import (
    closed_form_delta_j,
    delta_j,
    density_correlators,
    singlet_current_Js,
    singlet_current_limit,
    triplet_current,
)
from .pumping import PumpProtocol, cycle_average, instantaneous_delta_j, resonance_onsite
from .scattering import TwoParticleInput, delta_S, kernel_K, psi_at_contact, scattering_state

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "ImpurityChain",
    "NumericError",
    "ParallelModel",
    "PumpProtocol",
    "ResonanceError",
    "SideDot",
    "SideDotModel",
    "TwoParticleInput",
    "closed_form_delta_j",
    "cycle_average",
    "delta_S",
    "delta_j",
    "density_correlators",
    "instantaneous_delta_j",
    "kernel_K",
    "psi_at_contact",
    "resonance_onsite",
    "scattering_state",
    "singlet_current_Js",
    "singlet_current_limit",
    "triplet_current",
]
