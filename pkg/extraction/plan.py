"""
Measurement Planning
====================
Chooses probe site pairs so that every degeneracy group can be solved.

A correlator measurement probes Δφ_ij (or φ_i against ground) at φ_ext = π/2
and contributes one equation per group, with coefficient

    −w·F·H(ω_u)·c̃_n·c̃_m      for unknown u = N(n, m) or A(n, m)

where w = 2 for n < m and 1 for n = m. A single quadrature measurement at
φ_ext = 0 on the best-coupled site recovers Q.

Selection is greedy: each step takes the candidate adding the most new
row-space directions summed over the still rank-deficient groups, then up
to `slack` extra pairs raise the smallest singular value of the
worst-conditioned group.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from circuit.ladder import ModeBasis
from config import Config
from errors import ConfigError
from extraction.degeneracy import DegeneracyGroup, DegeneracyTable, degeneracy_groups
from probe.coupler import ProbeConfig, beta, readout_prefactor, transfer

logger = logging.getLogger(__name__)

# Residual fraction below which a new row adds no direction
INDEPENDENCE_TOL = 1e-6


@dataclass(frozen=True)
class Measurement:
    """One probe setting: node pair (site_j None = ground) and control flux"""
    site_i: int
    site_j: Optional[int] = None
    phi_ext: float = math.pi / 2

    @property
    def kind(self) -> str:
        return 'quadrature' if self.phi_ext == 0.0 else 'correlator'

    @property
    def label(self) -> str:
        other = 'ground' if self.site_j is None else str(self.site_j)
        return f"{self.kind}:{self.site_i}-{other}"

    def as_dict(self) -> dict:
        return {'site_i': self.site_i, 'site_j': self.site_j, 'phi_ext': self.phi_ext}


@dataclass(eq=False)
class MeasurementPlan:
    """Correlator measurements plus an optional quadrature measurement"""
    measurements: list
    table: DegeneracyTable
    quadrature: Optional[Measurement] = None
    group_reports: list = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.measurements)

    @property
    def complete(self) -> bool:
        return all(report['full_rank'] for report in self.group_reports)

    def all_measurements(self) -> list:
        head = [self.quadrature] if self.quadrature is not None else []
        return head + list(self.measurements)

    def expected_frequencies(self, measurement: Measurement, basis: ModeBasis) -> list:
        if measurement.kind == 'quadrature':
            return [basis.frequency(mode) for mode in self.table.modes]
        return [group.frequency for group in self.table.groups]


# =============================================================================
# COEFFICIENTS
# =============================================================================

def scaled_matrix(basis: ModeBasis, pairs: list, probe: Optional[ProbeConfig] = None) -> np.ndarray:
    """c̃ vectors (one row per site pair); β ≡ 1 without a probe"""
    gamma = np.asarray(basis.gamma)
    rows = np.empty((len(pairs), basis.n_modes))
    for index, (site_i, site_j) in enumerate(pairs):
        rows[index] = gamma[:, site_i - 1] - (gamma[:, site_j - 1] if site_j is not None else 0.0)
    if probe is not None:
        frequencies = np.zeros(basis.n_modes) if probe.beta_mode == 'quasi_static' else basis.omega
        rows = rows * beta(probe, frequencies)[None, :]
    return rows


def group_rows(group: DegeneracyGroup, scaled: np.ndarray, basis: ModeBasis,
               probe: Optional[ProbeConfig] = None) -> np.ndarray:
    """Coefficient rows of one group for every c̃ row in `scaled`"""
    F = readout_prefactor(probe) if probe is not None else 1.0
    idx_n = np.array([member.n - 1 for member in group.members])
    idx_m = np.array([member.m - 1 for member in group.members])
    weights = np.array([member.weight for member in group.members])
    frequencies = np.array([member.frequency(basis.omega) for member in group.members])
    H = transfer(probe, frequencies) if probe is not None else np.ones(len(frequencies))
    factors = -weights * F * H
    scaled = np.atleast_2d(scaled)
    return factors[None, :] * scaled[:, idx_n] * scaled[:, idx_m]


def candidate_pairs(N: int, include_ground: bool = True) -> list:
    pairs = [(i, None) for i in range(1, N + 1)] if include_ground else []
    pairs += [(i, j) for i in range(1, N + 1) for j in range(i + 1, N + 1)]
    return pairs


# =============================================================================
# RANK BOOKKEEPING
# =============================================================================

def _residuals(rows: np.ndarray, basis_rows: np.ndarray):
    """(row norms, norms of the parts outside the span of basis_rows)"""
    norms = np.linalg.norm(rows, axis=1)
    if len(basis_rows):
        rows = rows - (rows @ basis_rows.conj().T) @ basis_rows
    return norms, np.linalg.norm(rows, axis=1)


def _new_direction_scores(rows: np.ndarray, basis_rows: np.ndarray) -> np.ndarray:
    """Residual norms relative to the strongest row, zero where a row adds no direction"""
    norms, residual = _residuals(rows, basis_rows)
    scale = float(norms.max()) if len(norms) and norms.max() > 0 else 1.0
    return np.where(residual > INDEPENDENCE_TOL * norms, residual / scale, 0.0)


def _extend(basis_rows: np.ndarray, row: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(row)
    if norm == 0:
        return basis_rows
    residual = row - (basis_rows.conj() @ row) @ basis_rows if len(basis_rows) else row
    if np.linalg.norm(residual) <= INDEPENDENCE_TOL * norm:
        return basis_rows
    return np.vstack([basis_rows, residual / np.linalg.norm(residual)])


def _singular_values(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    return np.linalg.svd(matrix, compute_uv=False)


def group_report(group: DegeneracyGroup, matrix: np.ndarray) -> dict:
    """Rank and conditioning of one group's coefficient matrix"""
    sigma = _singular_values(matrix)
    threshold = Config.SVD_RTOL * sigma[0] if len(sigma) and sigma[0] > 0 else 0.0
    rank = int(np.sum(sigma > threshold)) if threshold > 0 else 0
    full = rank == group.size
    sigma_min = float(sigma[group.size - 1]) if full else 0.0
    return {
        'frequency': group.frequency,
        'members': group.labels,
        'size': group.size,
        'rank': rank,
        'missing_rank': group.size - rank,
        'sigma_max': float(sigma[0]) if len(sigma) else 0.0,
        'sigma_min': sigma_min,
        'condition': float(sigma[0] / sigma_min) if full and sigma_min > 0 else math.inf,
        'full_rank': full,
    }


# =============================================================================
# PLANNING
# =============================================================================

def plan_measurements(basis: ModeBasis, n_modes: int = None, probe: Optional[ProbeConfig] = None,
                      modes=None, slack: int = None, candidates: list = None,
                      table: DegeneracyTable = None) -> MeasurementPlan:
    """Greedy site-pair plan that brings every degeneracy group to full rank

    Args:
        basis: mode basis (γ_n(i) for every site)
        n_modes: modes 1..n_modes enter the unknowns (default all)
        probe: probe parameters for β and the readout transfer (β ≡ 1 if None)
        modes: explicit mode subset instead of n_modes
        slack: extra measurements after full rank (default Config.PLAN_SLACK)
        candidates: site pairs to choose from (default every (i, ground) and (i, j))
        table: precomputed degeneracy table

    Returns:
        MeasurementPlan; plan.complete is False when the candidates cannot reach full rank
    """
    table = table or degeneracy_groups(basis, n_modes=n_modes, modes=modes)
    slack = Config.PLAN_SLACK if slack is None else slack
    candidates = list(candidates) if candidates is not None else candidate_pairs(basis.N)
    if not candidates:
        raise ConfigError("no candidate site pairs to plan with")
    for site_i, site_j in candidates:
        basis.check_site(site_i)
        if site_j is not None:
            basis.check_site(site_j)

    scaled = scaled_matrix(basis, candidates, probe)
    rows = [group_rows(group, scaled, basis, probe) for group in table.groups]
    spans = [np.zeros((0, group.size), dtype=complex) for group in table.groups]
    chosen = []

    while True:
        deficient = [k for k, group in enumerate(table.groups) if len(spans[k]) < group.size]
        if not deficient:
            break
        scores = np.zeros(len(candidates))
        for k in deficient:
            scores += _new_direction_scores(rows[k], spans[k])
        scores[chosen] = -1.0
        best = int(np.argmax(scores))
        if scores[best] <= 0:
            logger.warning(f"Candidates exhausted with {len(deficient)} groups below full rank")
            break
        chosen.append(best)
        for k in deficient:
            spans[k] = _extend(spans[k], rows[k][best])

    for _ in range(slack):
        if not chosen or len(chosen) >= len(candidates):
            break
        worst = _worst_group(table, rows, chosen)
        if worst is None:
            break
        current = rows[worst][chosen]
        best, best_sigma = None, -1.0
        for index in range(len(candidates)):
            if index in chosen:
                continue
            sigma = _singular_values(np.vstack([current, rows[worst][index]]))
            value = float(sigma[min(table.groups[worst].size, len(sigma)) - 1])
            if value > best_sigma:
                best, best_sigma = index, value
        chosen.append(best)

    measurements = [Measurement(*candidates[index]) for index in chosen]
    weakest = np.min(np.abs(np.asarray(basis.gamma)[[mode - 1 for mode in table.modes]]), axis=0)
    quadrature = Measurement(int(np.argmax(weakest)) + 1, None, 0.0)

    reports = [group_report(group, rows[k][chosen]) for k, group in enumerate(table.groups)]
    plan = MeasurementPlan(measurements=measurements, table=table, quadrature=quadrature,
                           group_reports=reports)
    logger.info(
        f"Planned {plan.size} correlator measurements for {len(table.unknowns)} unknowns "
        f"(largest group {table.max_size()}, complete={plan.complete})"
    )
    return plan


def _worst_group(table: DegeneracyTable, rows: list, chosen: list) -> Optional[int]:
    worst, worst_ratio = None, math.inf
    for k, group in enumerate(table.groups):
        sigma = _singular_values(rows[k][chosen])
        if len(sigma) < group.size or sigma[0] == 0:
            continue
        ratio = sigma[group.size - 1] / sigma[0]
        if ratio < worst_ratio:
            worst, worst_ratio = k, ratio
    return worst


def build_plan(basis: ModeBasis, pairs: list, table: DegeneracyTable,
               probe: Optional[ProbeConfig] = None, quadrature_site: int = None) -> MeasurementPlan:
    """Plan from explicit site pairs, with rank reports"""
    scaled = scaled_matrix(basis, pairs, probe)
    reports = [group_report(group, group_rows(group, scaled, basis, probe)) for group in table.groups]
    quadrature = Measurement(quadrature_site, None, 0.0) if quadrature_site else None
    return MeasurementPlan(
        measurements=[Measurement(site_i, site_j) for site_i, site_j in pairs],
        table=table, quadrature=quadrature, group_reports=reports,
    )


def suggest_site_pairs(group: DegeneracyGroup, plan: MeasurementPlan, basis: ModeBasis,
                       probe: Optional[ProbeConfig] = None, count: int = 3) -> list:
    """Site pairs adding the most new directions to a rank-deficient group"""
    candidates = candidate_pairs(basis.N)
    existing = [(m.site_i, m.site_j) for m in plan.measurements]
    current = group_rows(group, scaled_matrix(basis, existing, probe), basis, probe) if existing else \
        np.zeros((0, group.size), dtype=complex)
    span = np.zeros((0, group.size), dtype=complex)
    for row in current:
        span = _extend(span, row)
    scores = _new_direction_scores(group_rows(group, scaled_matrix(basis, candidates, probe), basis, probe), span)
    order = np.argsort(-scores, kind='stable')
    return [candidates[index] for index in order[:count] if scores[index] > 0]
