"""
Dynamics Module
===============
Golden-rule rate equations for the mode populations and their steady state.
"""

from dynamics.rates import (
    RateModel,
    default_gamma,
    downconversion_rhs,
    energy_weighted_sum,
    population_fluctuations,
)
from dynamics.evolve import PopulationTrajectory, SteadyState, evolve, relaxation_time, steady_state

__all__ = [
    'RateModel',
    'PopulationTrajectory',
    'SteadyState',
    'default_gamma',
    'downconversion_rhs',
    'energy_weighted_sum',
    'evolve',
    'population_fluctuations',
    'relaxation_time',
    'steady_state',
]
