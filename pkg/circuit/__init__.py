"""
Circuit Module
==============
LC-ladder normal modes and the impurity coupling tensor.
"""

from circuit.ladder import (
    LadderConfig,
    ModeBasis,
    build_mode_basis,
    circuit_summary,
    orthonormality_error,
    phase_observable_coefficients,
)
from circuit.coupling import CouplingTensor, build_coupling_tensor, coupling_profile

__all__ = [
    'LadderConfig',
    'ModeBasis',
    'CouplingTensor',
    'build_mode_basis',
    'build_coupling_tensor',
    'circuit_summary',
    'coupling_profile',
    'orthonormality_error',
    'phase_observable_coefficients',
]
