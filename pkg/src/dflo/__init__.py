"""Classical simulation of dissipative fermionic linear optics.

Gaussian fermionic states are tracked through their ``2N x 2N`` covariance
matrices under quadratic Hamiltonians, Lindblad channels with linear jump
operators, and occupation-number measurements.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import DfloError, NumericalError, ParseError, ValidationError
from .model import (
    LindbladModel,
    LindbladOperator,
    QuadraticHamiltonian,
    drift_and_noise,
    hamiltonian_from_dirac,
    jump_from_dirac,
)
from .state import number_state, occupations, vacuum, validate, williamson
from .evolve import Backend, dissipative_evolve, steady_state, trajectory, unitary_evolve
from .measure import RandomSource, apply_outcome, outcome_probability, sample_mode, sample_subset
from .circuit import Program, run, sample_shots

__all__ = [
    "Backend",
    "DfloError",
    "LindbladModel",
    "LindbladOperator",
    "NumericalError",
    "ParseError",
    "Program",
    "QuadraticHamiltonian",
    "RandomSource",
    "ValidationError",
    "apply_outcome",
    "dissipative_evolve",
    "drift_and_noise",
    "hamiltonian_from_dirac",
    "jump_from_dirac",
    "number_state",
    "occupations",
    "outcome_probability",
    "run",
    "sample_mode",
    "sample_shots",
    "sample_subset",
    "steady_state",
    "trajectory",
    "unitary_evolve",
    "vacuum",
    "validate",
    "williamson",
]
