"""Ground-state gap of the p-spin model with antiferromagnetic transverse couplings."""
from .dicke import ModelParams, SectorHamiltonian, build_sector_hamiltonian
from .errors import (ClassicallyAllowedError, NoCriticalPointError, NoInteriorMinimumError,
                     NoTransitionError, NumericalError, ValidationError)

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "SectorHamiltonian", "build_sector_hamiltonian",
    "ClassicallyAllowedError", "NoCriticalPointError", "NoInteriorMinimumError",
    "NoTransitionError", "NumericalError", "ValidationError",
]
