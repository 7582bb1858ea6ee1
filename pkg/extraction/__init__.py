"""
Extraction Module
=================
Inverts probe measurements into mode-space correlators: quadrature fits,
degeneracy grouping, measurement planning and the per-group solver.
"""

from extraction.quadratures import QuadratureFit, best_quadrature_site, extract_quadratures
from extraction.degeneracy import DegeneracyGroup, DegeneracyTable, Unknown, degeneracy_groups
from extraction.plan import (
    Measurement,
    MeasurementPlan,
    build_plan,
    candidate_pairs,
    plan_measurements,
    suggest_site_pairs,
)
from extraction.solver import ExtractionResult, assemble_and_solve

__all__ = [
    'DegeneracyGroup',
    'DegeneracyTable',
    'ExtractionResult',
    'Measurement',
    'MeasurementPlan',
    'QuadratureFit',
    'Unknown',
    'assemble_and_solve',
    'best_quadrature_site',
    'build_plan',
    'candidate_pairs',
    'degeneracy_groups',
    'extract_quadratures',
    'plan_measurements',
    'suggest_site_pairs',
]
