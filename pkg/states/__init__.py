"""
States Module
=============
Trial wavefunctions, their closed-form correlators and a Fock-space oracle.
"""

from states.trial import (
    CorrelationSet,
    SqueezingMeasure,
    StateKind,
    TrialState,
    alphas_from_populations,
    correlation_differences,
    correlations,
    derive_xi,
    random_phases,
    squeezing_measure,
    squeezing_pairs,
)
from states.oracle import fock_space_oracle

__all__ = [
    'CorrelationSet',
    'SqueezingMeasure',
    'StateKind',
    'TrialState',
    'alphas_from_populations',
    'correlation_differences',
    'correlations',
    'derive_xi',
    'fock_space_oracle',
    'random_phases',
    'squeezing_measure',
    'squeezing_pairs',
]
