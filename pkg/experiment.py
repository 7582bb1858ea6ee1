"""
Experiment Runner
=================
Runs the pipeline stages for one experiment and writes their output files.

Stages:
- dynamics:      trajectory.csv (or .jsonl), steady_state.jsonl
- correlations:  correlations_{coherent,fock,squeezed}.jsonl, correlation_differences.jsonl
- probe:         readout, spectrum (csv or jsonl), peaks.jsonl
- plan:          plan.jsonl
- extract:       measurements.jsonl, recovered.jsonl, extraction_report.{jsonl,txt}
- report:        report.jsonl

Every stage returns a result dict (success, exit_code, files, warnings, error)
and never raises for expected failures.
"""

import logging
import math
import os

import numpy as np

from circuit import build_coupling_tensor, build_mode_basis, circuit_summary, orthonormality_error
from circuit.ladder import phase_observable_coefficients
from config import Config
from dynamics import RateModel, energy_weighted_sum, evolve, population_fluctuations, relaxation_time, steady_state
from errors import ConfigError, RankDeficiencyError, SullamError
from experiment_config import ExperimentConfig
from export import (
    correlation_records,
    measured_from_records,
    measurement_records,
    read_jsonl,
    squeezing_records,
    write_jsonl,
    write_table,
    write_text,
)
from extraction import (
    Measurement,
    MeasurementPlan,
    assemble_and_solve,
    build_plan,
    degeneracy_groups,
    plan_measurements,
)
from probe import (
    add_measurement_noise,
    beta,
    check_criteria,
    find_spectral_peaks,
    merge_components,
    phase_series,
    power_spectrum,
    predicted_fourier_components,
    readout_frequency,
    readout_impedance,
    readout_prefactor,
    sampling_for,
    simulate_readout,
    synthesize,
    two_tone_inputs,
)
from states import (
    TrialState,
    alphas_from_populations,
    correlation_differences,
    correlations,
    derive_xi,
    random_phases,
    squeezing_measure,
    squeezing_pairs,
)

logger = logging.getLogger(__name__)

STATE_FILES = {
    'coherent': 'correlations_coherent.jsonl',
    'fock': 'correlations_fock.jsonl',
    'squeezed': 'correlations_squeezed.jsonl',
}


def _result(files=None, warnings=None, error=None, exit_code=0, **details) -> dict:
    result = {
        'success': error is None,
        'exit_code': exit_code,
        'files': files or [],
        'warnings': warnings or [],
        'error': error,
    }
    result.update(details)
    return result


def _failure(e: SullamError, files=None) -> dict:
    logger.error(f"{type(e).__name__}: {e}")
    return _result(files=files, error=str(e), exit_code=e.exit_code, error_type=type(e).__name__)


class ExperimentRunner:
    """Pipeline stages for one ExperimentConfig, writing into out_dir"""

    def __init__(self, config: ExperimentConfig, out_dir: str = None, seed: int = None, fmt: str = 'csv'):
        self.config = config
        self.out_dir = out_dir or Config.OUT_DIR
        if seed is None:
            seed = config.state.seed if config.state.seed is not None else Config.DEFAULT_SEED
        self.seed = seed
        self.fmt = fmt
        self._basis = None
        self._tensor = None

    # -------------------------------------------------------------------------
    # Shared pieces
    # -------------------------------------------------------------------------

    @property
    def basis(self):
        if self._basis is None:
            self._basis = build_mode_basis(self.config.ladder)
        return self._basis

    @property
    def tensor(self):
        if self._tensor is None:
            self._tensor = build_coupling_tensor(self.config.ladder, self.basis)
        return self._tensor

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _probe(self):
        if self.config.probe is None:
            raise ConfigError("this stage needs a [probe] section (add the table2_probe preset)", field='probe')
        return self.config.probe

    def rate_model(self) -> RateModel:
        return RateModel.from_config(self.config.ladder, self.basis, self.tensor)

    def _sites(self):
        run = self.config.run
        site_j = run.site_j if run.site_j else None
        self.basis.check_site(run.site_i, 'run.site_i')
        if site_j is not None:
            self.basis.check_site(site_j, 'run.site_j')
        return run.site_i, site_j

    def load_steady_state(self, steady_path: str = None) -> dict:
        """Populations (and T*) from a steady-state file or the [state] section

        Raises:
            ConfigError: neither source is available
        """
        path = steady_path or self.path('steady_state.jsonl')
        if os.path.exists(path):
            record = read_jsonl(path)[0]
            return {
                'populations': np.array(record['populations'], dtype=float),
                'relaxation_time': record.get('relaxation_time'),
                'source': path,
            }
        if self.config.state.populations is not None:
            return {
                'populations': np.array(self.config.state.populations, dtype=float),
                'relaxation_time': None,
                'source': 'state.populations',
            }
        raise ConfigError(
            f"no steady state: run `sullam dynamics` first, pass --steady-state, "
            f"or set state.populations (looked for {path})"
        )

    def trial_states(self, steady: dict) -> dict:
        """Coherent, Fock and squeezed trial states built on the steady populations"""
        ladder = self.config.ladder
        populations = steady['populations']
        if len(populations) != self.basis.n_modes:
            raise ConfigError(f"{len(populations)} populations for {self.basis.n_modes} modes")
        alphas = alphas_from_populations(np.clip(populations, 0.0, None), random_phases(len(populations), self.seed))

        T_star = self.config.state.T_star or steady.get('relaxation_time')
        if not T_star:
            raise ConfigError("squeezed state needs state.T_star or a relaxation time from the dynamics run",
                              field='state.T_star')
        pairs = squeezing_pairs(ladder.drive_mode, self.basis.n_modes)
        xi = derive_xi(alphas[ladder.drive_mode - 1], self.tensor.g, self.tensor, pairs,
                       ladder.drive_mode, T_star)
        xi = {pair: value for pair, value in xi.items() if value != 0}
        return {
            'coherent': TrialState.coherent(alphas),
            'fock': TrialState.fock(np.rint(np.clip(populations, 0.0, None))),
            'squeezed': TrialState.squeezed(alphas, xi, drive_mode=ladder.drive_mode, T_star=T_star),
        }

    # -------------------------------------------------------------------------
    # Stages
    # -------------------------------------------------------------------------

    def run_dynamics(self) -> dict:
        """Trajectory from vacuum and the steady state with convergence metadata"""
        files = []
        try:
            model = self.rate_model()
            ladder = self.config.ladder
            t_end = self.config.run.t_end or Config.STEADY_STATE_KAPPA_TIMES / ladder.kappa
            trajectory = evolve(None, model, t_end, n_samples=self.config.run.samples)

            header = ['t'] + [f"N_{n}" for n in range(1, model.n_modes + 1)]
            rows = (np.concatenate([[t], populations]) for t, populations in
                    zip(trajectory.times, trajectory.populations))
            files.append(write_table(self.path('trajectory'), header, rows, self.fmt))

            steady = steady_state(model)
            record = steady.as_dict()
            record.update({
                'record': 'steady_state',
                'fluctuations': population_fluctuations(steady.populations),
                'relaxation_time': relaxation_time(trajectory, steady.populations),
                'energy_weighted_sum': float(energy_weighted_sum(steady.populations)),
                'Gamma': model.Gamma,
                'kappa': model.kappa,
                'Omega0': model.Omega0,
                'drive_mode': model.drive_mode,
            })
            files.append(write_jsonl(self.path('steady_state.jsonl'), [record]))
            logger.info(f"Dynamics done: drive-mode population {steady.populations[model.drive_mode - 1]:.4g}")
            return _result(files=files, steady_state=steady.populations.tolist())
        except SullamError as e:
            return _failure(e, files)

    def run_correlations(self, steady_path: str = None) -> dict:
        """Closed-form correlators of the three trial states"""
        try:
            states = self.trial_states(self.load_steady_state(steady_path))
            files, sets = [], {}
            for kind, state in states.items():
                corr = correlations(state, self.basis)
                sets[kind] = corr
                files.append(write_jsonl(self.path(STATE_FILES[kind]), correlation_records(corr)))

            differences = correlation_differences(sets['coherent'], sets['squeezed'])
            records = [{'record': 'difference', 'channel': channel, 'n': n, 'm': m}
                       for channel, n, m in differences]
            files.append(write_jsonl(self.path('correlation_differences.jsonl'), records))
            logger.info(f"Correlations written; squeezed state differs from coherent in {len(differences)} entries")
            return _result(files=files, differences=len(differences))
        except SullamError as e:
            return _failure(e)

    def run_probe(self, steady_path: str = None) -> dict:
        """Readout current, its spectrum and peaks for the two-tone test or a trial state

        Coherent inputs go through the time-domain readout; Fock and squeezed
        inputs have no mean-field trace and are synthesized from the predicted
        readout components instead.
        """
        try:
            probe = self._probe()
            run = self.config.run
            basis = self.basis
            if run.probe_input == 'two_tone':
                phi_i, phi_j = two_tone_inputs(
                    basis.omega0, run.amplitude_i, run.amplitude_j, run.harmonic_i, run.harmonic_j,
                    run.samples_per_period, run.periods,
                )
                current = simulate_readout(phi_i, phi_j, probe)
            else:
                site_i, site_j = self._sites()
                kind = self.config.state.kind
                corr = correlations(self.trial_states(self.load_steady_state(steady_path))[kind], basis)
                coeffs_i = phase_observable_coefficients(basis, site_i)
                coeffs_j = phase_observable_coefficients(basis, site_j) if site_j else None
                dt, n_samples = sampling_for(float(basis.omega[-1]), float(basis.omega[0]), probe.kappa_probe)
                phi_i = phase_series(corr, coeffs_i, dt, n_samples)
                phi_j = phase_series(corr, coeffs_j if coeffs_j is not None else np.zeros(basis.n_modes),
                                     dt, n_samples)
                if kind == 'coherent':
                    current = simulate_readout(phi_i, phi_j, probe)
                else:
                    components = predicted_fourier_components(corr, coeffs_i, coeffs_j, probe)
                    current = synthesize(components, dt, n_samples)

            spectrum = power_spectrum(current, run.window)
            peaks = find_spectral_peaks(spectrum, n_peaks=run.n_peaks)

            files = [
                write_table(self.path('readout'), ['t', 'phi_i', 'phi_j', 'I_P'],
                            zip(current.times, phi_i.samples, phi_j.samples, current.samples), self.fmt),
                write_table(self.path('spectrum'), ['omega', 'psd'],
                            zip(spectrum.frequencies, spectrum.psd), self.fmt),
                write_jsonl(self.path('peaks.jsonl'), [
                    {'record': 'peak', 'rank': rank, 'frequency': frequency,
                     'frequency_over_omega0': frequency / basis.omega0, 'power': power}
                    for rank, (frequency, power) in enumerate(peaks, start=1)
                ]),
            ]
            if peaks:
                logger.info(f"Probe run: {len(current)} samples, strongest peak at {peaks[0][0] / basis.omega0:.3f} ω0")
            else:
                logger.warning("Probe run produced no spectral peaks")
            return _result(files=files, peaks=[frequency / basis.omega0 for frequency, _ in peaks])
        except SullamError as e:
            return _failure(e)

    def make_plan(self) -> MeasurementPlan:
        return plan_measurements(self.basis, n_modes=self.config.run.n_modes, probe=self._probe())

    def run_plan(self) -> dict:
        try:
            plan = self.make_plan()
            files = [write_jsonl(self.path('plan.jsonl'), plan_records(plan, self.basis))]
            warnings = [] if plan.complete else ['plan does not reach full rank in every group']
            return _result(files=files, warnings=warnings, plan_size=plan.size, complete=plan.complete)
        except SullamError as e:
            return _failure(e)

    def synthesize_measurements(self, plan: MeasurementPlan, corr) -> list:
        """Predicted components for every plan entry, merged per frequency, optionally noisy"""
        probe = self._probe()
        tolerance = 1e-9 * self.basis.omega0
        rng = np.random.default_rng(self.seed)
        measured = []
        for measurement in plan.all_measurements():
            coeffs_i = phase_observable_coefficients(self.basis, measurement.site_i)
            coeffs_j = (phase_observable_coefficients(self.basis, measurement.site_j)
                        if measurement.site_j is not None else None)
            components = merge_components(
                predicted_fourier_components(corr, coeffs_i, coeffs_j, probe.with_flux(measurement.phi_ext)),
                tolerance,
            )
            if self.config.state.snr_db is not None:
                components = add_measurement_noise(components, self.config.state.snr_db, rng)
            measured.append(components)
        return measured

    def run_extract(self, measurements_path: str = None, steady_path: str = None) -> dict:
        """Recover correlators from measurement files, or from synthesized ones"""
        files = []
        try:
            probe = self._probe()
            if measurements_path:
                settings, measured = measured_from_records(read_jsonl(measurements_path))
                plan = self._plan_from_settings(settings)
                truth = None
            else:
                kind = self.config.state.kind
                state = self.trial_states(self.load_steady_state(steady_path))[kind]
                truth = correlations(state, self.basis)
                plan = self.make_plan()
                measured = self.synthesize_measurements(plan, truth)
                files.append(write_jsonl(self.path('measurements.jsonl'),
                                         measurement_records(plan.all_measurements(), measured)))

            try:
                result = assemble_and_solve(plan, measured, self.basis, probe)
                exit_code, error = 0, None
            except RankDeficiencyError as e:
                result = e.result
                exit_code, error = e.exit_code, str(e)

            recovered = result.correlations
            files.append(write_jsonl(self.path('recovered.jsonl'), correlation_records(recovered)))
            report = extraction_report(result, truth, plan)
            files.append(write_jsonl(self.path('extraction_report.jsonl'), report))
            files.append(write_text(self.path('extraction_report.txt'),
                                    extraction_summary_lines(report, self.basis.omega0)))
            if error:
                logger.error(f"Extraction incomplete: {error}")
            return _result(files=files, error=error, exit_code=exit_code,
                           deficient=len(result.deficient), plan_size=plan.size)
        except SullamError as e:
            return _failure(e, files)

    def _plan_from_settings(self, settings: list) -> MeasurementPlan:
        table = degeneracy_groups(self.basis, n_modes=self.config.run.n_modes)
        quadrature = [s for s in settings if s['phi_ext'] == 0.0]
        pairs = [(s['site_i'], s['site_j']) for s in settings if s['phi_ext'] != 0.0]
        if settings and settings[0]['phi_ext'] != 0.0 and quadrature:
            raise ConfigError("the quadrature measurement must come first in the measurement file")
        if len(quadrature) > 1:
            raise ConfigError("at most one quadrature measurement is supported")
        site = quadrature[0]['site_i'] if quadrature else None
        return build_plan(self.basis, pairs, table, self._probe(), quadrature_site=site)

    def run_report(self) -> dict:
        """Derived constants, tabulated-value discrepancies and design checks"""
        try:
            ladder = self.config.ladder
            basis = self.basis
            summary = circuit_summary(ladder, basis)
            records = [dict(record='circuit', **summary, orthonormality_error=orthonormality_error(basis),
                            omega=basis.omega)]

            n, m, l, values = self.tensor.triples()
            if len(values):
                top = int(np.argmax(values ** 2))
                records.append({'record': 'coupling', 'triples': len(values),
                                'dominant': [int(n[top]), int(m[top]), int(l[top])],
                                'max_A_squared': float(values[top] ** 2),
                                'Gamma': self.rate_model().Gamma})

            table = degeneracy_groups(basis, n_modes=self.config.run.n_modes)
            records.append({'record': 'degeneracy', 'groups': len(table.groups),
                            'max_group': table.max_size(), 'max_group_A': table.max_size('A'),
                            'max_group_N': table.max_size('N')})

            warnings = list(summary['warnings'])
            if self.config.probe is not None:
                probe = self.config.probe
                findings = check_criteria(probe, basis)
                warnings += [finding['message'] for finding in findings if finding['ok'] is False]
                reference = self.config.reference
                records.append({
                    'record': 'probe',
                    'beta_dc': beta(probe, 0.0),
                    'Z_P': readout_impedance(probe),
                    'omega_P': readout_frequency(probe),
                    'full_scale_current': readout_prefactor(probe),
                    'reference': reference,
                    'criteria': findings,
                })
                if 'beta' in reference:
                    deviation = abs(beta(probe, 0.0) - reference['beta']) / reference['beta']
                    records[-1]['beta_deviation'] = deviation

            files = [write_jsonl(self.path('report.jsonl'), records)]
            return _result(files=files, warnings=warnings)
        except SullamError as e:
            return _failure(e)


# =============================================================================
# REPORT RECORDS
# =============================================================================

def plan_records(plan: MeasurementPlan, basis) -> list:
    records = []
    for index, measurement in enumerate(plan.all_measurements()):
        record = {'record': 'measurement', 'index': index, 'kind': measurement.kind}
        record.update(measurement.as_dict())
        record['expected_frequencies'] = plan.expected_frequencies(measurement, basis)
        records.append(record)
    for report in plan.group_reports:
        records.append(dict(record='group', **report))
    return records


def extraction_report(result, truth, plan: MeasurementPlan) -> list:
    records = [dict(record='group', **report) for report in result.groups]
    recovered = result.correlations
    measure = squeezing_measure(recovered)
    records += squeezing_records(measure, squeezing_measure(truth) if truth is not None else None)
    magnitudes = np.abs(np.concatenate([recovered.N.ravel(), recovered.A.ravel()]))
    magnitudes = magnitudes[np.isfinite(magnitudes)]
    # S support is judged against the correlator scale, not against S itself
    tol = 1e-6 * (float(magnitudes.max()) if len(magnitudes) else 0.0)
    summary = {
        'record': 'summary',
        'plan_size': plan.size,
        'complete': result.complete,
        'unrecoverable_modes': result.unrecoverable_modes,
        'squeezing_support_sum': sorted(measure.support('sum', tol)),
        'squeezing_support_difference': sorted(measure.support('difference', tol)),
    }
    if truth is not None:
        summary['max_relative_error'] = _max_relative_error(recovered, truth, plan)
        errors = [record['relative_error'] for record in records if record['record'] == 'S']
        summary['max_squeezing_error'] = max(errors, key=lambda error: math.inf if math.isnan(error) else error)
    records.append(summary)
    return records


def _max_relative_error(recovered, truth, plan: MeasurementPlan) -> float:
    scale = max(np.max(np.abs(truth.N)), np.max(np.abs(truth.A)), 1e-300)
    worst = 0.0
    for unknown in plan.table.unknowns:
        matrix_r = recovered.N if unknown.channel == 'N' else recovered.A
        matrix_t = truth.N if unknown.channel == 'N' else truth.A
        delta = abs(matrix_r[unknown.n - 1, unknown.m - 1] - matrix_t[unknown.n - 1, unknown.m - 1])
        worst = max(worst, delta / scale if math.isfinite(delta) else math.inf)
    return worst


def extraction_summary_lines(records: list, omega0: float) -> list:
    """Plain-text rendering of an extraction report"""
    summary = records[-1]
    lines = [
        "Extraction report",
        "=================",
        f"plan size:            {summary['plan_size']}",
        f"complete:             {'yes' if summary['complete'] else 'no'}",
        f"unrecoverable modes:  {', '.join(map(str, summary['unrecoverable_modes'])) or 'none'}",
    ]
    if 'max_relative_error' in summary:
        lines.append(f"max relative error:   {summary['max_relative_error']:.3e} (N, A)"
                     f" / {summary['max_squeezing_error']:.3e} (S)")

    lines += ["", "Groups (frequency / ω0, size, rank, condition, members)"]
    for record in records:
        if record['record'] != 'group':
            continue
        lines.append(
            f"  {record['frequency'] / omega0:8.4f}  {record['size']:3d}  {record['rank']:3d}  "
            f"{record['condition']:10.3e}  {' '.join(record['members'])}"
        )

    lines += ["", "Squeezing measure S_nm above tolerance (channel, n, m, Re, Im)"]
    support = {('sum', n, m) for n, m in summary['squeezing_support_sum']}
    support |= {('difference', n, m) for n, m in summary['squeezing_support_difference']}
    entries = [record for record in records
               if record['record'] == 'S' and (record['channel'], record['n'], record['m']) in support]
    for record in entries:
        lines.append(f"  {record['channel']:10s}  {record['n']:2d}  {record['m']:2d}  "
                     f"{record['re']: .6e}  {record['im']: .6e}")
    if not entries:
        lines.append("  none: every S_nm vanishes, the state clusters")
    return lines
