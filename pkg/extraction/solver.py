"""
Correlator Solver
=================
Turns measured readout components into N_nm, A_nm (and Q_n) for a plan.

Each correlator measurement's components are binned into degeneracy groups;
the DC group has the vacuum baseline F·(1 − ½Σc̃²) removed first. Every group
is then solved on its own by SVD least squares with a 1e-10·σ_max cutoff.
Groups below full rank are reported with suggested extra site pairs and
their unknowns are left as NaN.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from circuit.ladder import ModeBasis
from config import Config
from errors import ConfigError, RankDeficiencyError
from extraction.degeneracy import Unknown
from extraction.plan import Measurement, MeasurementPlan, group_report, group_rows, scaled_matrix, suggest_site_pairs
from probe.components import vacuum_baseline
from probe.coupler import ProbeConfig, readout_prefactor, transfer
from states.trial import CorrelationSet

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ExtractionResult:
    """Recovered correlators with per-group diagnostics"""
    correlations: CorrelationSet
    groups: list
    unrecoverable_modes: list = field(default_factory=list)

    @property
    def deficient(self) -> list:
        return [report for report in self.groups if not report['full_rank']]

    @property
    def complete(self) -> bool:
        return not self.deficient

    def value(self, unknown: Unknown) -> complex:
        matrix = self.correlations.N if unknown.channel == 'N' else self.correlations.A
        return complex(matrix[unknown.n - 1, unknown.m - 1])


def _solve_group(matrix: np.ndarray, rhs: np.ndarray):
    """Truncated-SVD least squares; returns (solution, rank, residual norm)"""
    if matrix.size == 0:
        return np.zeros(matrix.shape[1], dtype=complex), 0, float(np.linalg.norm(rhs))
    U, sigma, Vh = np.linalg.svd(matrix, full_matrices=False)
    if sigma[0] == 0:
        return np.zeros(matrix.shape[1], dtype=complex), 0, float(np.linalg.norm(rhs))
    rank = int(np.sum(sigma > Config.SVD_RTOL * sigma[0]))
    projected = (U[:, :rank].conj().T @ rhs) / sigma[:rank]
    solution = Vh[:rank].conj().T @ projected
    return solution, rank, float(np.linalg.norm(matrix @ solution - rhs))


def _quadratures(measurement: Measurement, components: list, basis: ModeBasis,
                 probe: ProbeConfig, modes: tuple):
    """Q_n from a φ_ext = 0 record: amplitude at ω_n over 2·F·H(ω_n)·c̃_n"""
    Q = np.zeros(basis.n_modes, dtype=complex)
    scaled = scaled_matrix(basis, [(measurement.site_i, measurement.site_j)], probe)[0]
    floor = Config.GAMMA_FLOOR * float(np.max(np.abs(scaled))) if np.any(scaled) else math.inf
    tolerance = Config.degeneracy_tolerance(basis.omega0)
    F = readout_prefactor(probe)
    unrecoverable = []

    for mode in modes:
        omega = basis.frequency(mode)
        if abs(scaled[mode - 1]) < floor:
            Q[mode - 1] = np.nan
            unrecoverable.append(mode)
            continue
        amplitude = sum((c.amplitude for c in components if abs(c.frequency - omega) <= tolerance), 0j)
        Q[mode - 1] = amplitude / (2 * F * transfer(probe, omega) * scaled[mode - 1])
    if unrecoverable:
        logger.warning(f"Quadratures of modes {unrecoverable} unrecoverable at site {measurement.site_i}")
    return Q, unrecoverable


def assemble_and_solve(plan: MeasurementPlan, measured: list, basis: ModeBasis,
                       probe: ProbeConfig, strict: bool = True) -> ExtractionResult:
    """Recover N, A (and Q) from component lists measured for every plan entry

    Args:
        plan: measurement plan with its degeneracy table
        measured: one list of FourierComponent per entry of plan.all_measurements()
        basis: mode basis (known γ_n(i))
        probe: probe parameters used for the measurements
        strict: raise RankDeficiencyError when any group is below full rank

    Raises:
        ConfigError: measured lists do not match the plan
        RankDeficiencyError: (strict) deficient groups; the partial result is attached
    """
    entries = plan.all_measurements()
    if len(measured) != len(entries):
        raise ConfigError(f"{len(measured)} measured records for {len(entries)} planned measurements")

    table = plan.table
    modes = table.modes
    n_modes = basis.n_modes
    Q = np.zeros(n_modes, dtype=complex)
    unrecoverable = []

    correlator_pairs = []
    group_rhs = [np.zeros(0, dtype=complex) for _ in table.groups]
    rhs_rows = []
    for measurement, components in zip(entries, measured):
        if measurement.kind == 'quadrature':
            Q, unrecoverable = _quadratures(measurement, components, basis, probe, modes)
            continue
        pair = (measurement.site_i, measurement.site_j)
        correlator_pairs.append(pair)
        scaled = scaled_matrix(basis, [pair], probe)[0]

        row = np.zeros(len(table.groups), dtype=complex)
        for component in components:
            group = table.nearest_group(component.frequency)
            if group is None:
                logger.debug(f"Component at {component.frequency:.4e} rad/s matches no group; ignored")
                continue
            row[table.groups.index(group)] += component.amplitude
        for k, group in enumerate(table.groups):
            if group.is_dc:
                row[k] -= vacuum_baseline(probe, scaled)
        rhs_rows.append(row)

    if rhs_rows:
        stacked = np.array(rhs_rows)
        group_rhs = [stacked[:, k] for k in range(len(table.groups))]
    scaled_all = scaled_matrix(basis, correlator_pairs, probe) if correlator_pairs else np.zeros((0, n_modes))

    N = np.zeros((n_modes, n_modes), dtype=complex)
    A = np.zeros((n_modes, n_modes), dtype=complex)
    reports = []
    for k, group in enumerate(table.groups):
        matrix = group_rows(group, scaled_all, basis, probe) if len(scaled_all) else np.zeros((0, group.size))
        report = group_report(group, matrix)
        solution, rank, residual = _solve_group(matrix, group_rhs[k])
        report['residual_norm'] = residual
        if rank < group.size:
            solution = np.full(group.size, np.nan, dtype=complex)
            report['suggested_pairs'] = suggest_site_pairs(group, plan, basis, probe)
        for member, value in zip(group.members, solution):
            target = N if member.channel == 'N' else A
            i, j = member.n - 1, member.m - 1
            target[i, j] = value
            target[j, i] = np.conj(value) if member.channel == 'N' else value
        reports.append(report)

    recovered = CorrelationSet(omega=basis.omega, Q=Q, N=N, A=A, label='recovered')
    result = ExtractionResult(correlations=recovered, groups=reports, unrecoverable_modes=unrecoverable)

    if result.deficient:
        labels = [f"{report['frequency']:.4e} rad/s ({report['missing_rank']} missing)" for report in result.deficient]
        logger.warning(f"{len(labels)} degeneracy groups below full rank")
        if strict:
            raise RankDeficiencyError(
                f"rank-deficient groups: {', '.join(labels)}",
                groups=result.deficient, result=result,
            )
    else:
        logger.info(f"Recovered {len(table.unknowns)} correlators from {len(correlator_pairs)} measurements")
    return result
