import dataclasses
import math

import numpy as np
import pytest

from circuit import phase_observable_coefficients
from errors import ConfigError, PoleProximityError, RegimeError, SamplingError
from probe import (
    FourierComponent,
    ReadoutFilter,
    TimeSeries,
    add_measurement_noise,
    beta,
    check_criteria,
    coupler_pole,
    find_spectral_peaks,
    flux_kind,
    junction_current,
    merge_components,
    parseval_error,
    phase_series,
    power_spectrum,
    predicted_fourier_components,
    readout_frequency,
    readout_impedance,
    readout_prefactor,
    sampling_for,
    scaled_coefficients,
    simulate_readout,
    synthesize,
    tone_amplitude,
    transfer,
    tuner_phase,
    two_tone_inputs,
    vacuum_baseline,
)
from states import TrialState, correlations


def _coherent(basis, entries):
    alphas = np.zeros(basis.n_modes, dtype=complex)
    for mode, value in entries.items():
        alphas[mode - 1] = value
    return correlations(TrialState.coherent(alphas), basis)


# =============================================================================
# COUPLER / READOUT CONSTANTS
# =============================================================================

def test_beta_is_one_third_for_tabulated_probe(probe):
    assert beta(probe, 0.0) == pytest.approx(1 / 3)
    omega = np.array([0.0, 1e8, 1e9, 1.2e10, 1.2e11])
    np.testing.assert_allclose(beta(probe, omega), 1 / 3)
    assert coupler_pole(probe) is None


def test_uncancelled_pole(probe):
    detuned = dataclasses.replace(probe, C_X=20e-15)
    pole = coupler_pole(detuned)
    assert pole == pytest.approx(math.sqrt(3e4 / 5e-14), rel=1e-9)
    with pytest.raises(PoleProximityError):
        beta(detuned, pole)
    assert math.isnan(beta(detuned, pole, strict=False))
    with pytest.raises(ConfigError):
        beta(probe, -1.0)


def test_readout_constants_match_reference(experiment, probe):
    reference = experiment.reference
    assert readout_impedance(probe) == pytest.approx(reference['Z_P'], rel=1e-2)
    assert readout_frequency(probe) == pytest.approx(reference['omega_P'], rel=1e-2)
    assert readout_prefactor(probe) == pytest.approx(reference['I_P_critical'], rel=2e-2)


def test_tuner_and_junction(probe):
    assert junction_current(0.0, math.pi / 2, probe.I_c) == pytest.approx(probe.I_c)
    assert tuner_phase(probe, probe.I_c) == pytest.approx(probe.EJ_P / probe.E_M)


def test_transfer_functions(probe):
    assert transfer(probe, 0.0) == pytest.approx(1.0)
    assert abs(transfer(probe, probe.kappa_probe)) == pytest.approx(1 / math.sqrt(2))
    two_pole = dataclasses.replace(probe, damping='two_pole')
    assert transfer(two_pole, 0.0) == pytest.approx(1.0)
    w_p = readout_frequency(probe)
    assert transfer(two_pole, w_p) == pytest.approx(1j * w_p / probe.kappa_probe)


def test_criteria(probe, basis):
    findings = {finding['criterion']: finding for finding in check_criteria(probe, basis)}
    assert findings['impedance']['ok'] is True
    assert findings['coupler_pole']['ok'] is True
    assert findings['full_scale_current']['ok'] is True
    assert findings['readout_frequency']['ok'] is None

    detuned = dataclasses.replace(probe, C_X=20e-15)
    findings = {finding['criterion']: finding for finding in check_criteria(detuned, basis)}
    assert findings['coupler_pole']['ok'] is False


def test_invalid_probe(probe):
    with pytest.raises(ConfigError):
        dataclasses.replace(probe, damping='critical')
    with pytest.raises(ConfigError):
        dataclasses.replace(probe, L_P=0.0)


# =============================================================================
# TIME DOMAIN
# =============================================================================

def test_two_tone_spectrum_peaks(basis, probe):
    phi_i, phi_j = two_tone_inputs(basis.omega0)
    current = simulate_readout(phi_i, phi_j, probe)
    spectrum = power_spectrum(current, 'hann')

    top = find_spectral_peaks(spectrum, n_peaks=4)
    assert sorted(round(frequency / basis.omega0) for frequency, _ in top) == [1, 6, 7, 8]

    F = readout_prefactor(probe)
    b = 0.2
    seven = tone_amplitude(spectrum, 7 * basis.omega0)
    eight = tone_amplitude(spectrum, 8 * basis.omega0)
    assert seven == pytest.approx(F * b ** 2 / 2 * abs(transfer(probe, 7 * basis.omega0)), rel=3e-2)
    assert seven / eight == pytest.approx(2.0, rel=0.1)

    # quartic term of the cosine: the strongest residual below the mixing products sits at 2ω0
    peaks = find_spectral_peaks(spectrum)
    weakest_main = min(power for _, power in peaks[:4])
    assert all(power < 1e-3 * weakest_main for _, power in peaks[4:])
    low = [(frequency, power) for frequency, power in peaks[4:] if frequency < 5.5 * basis.omega0]
    assert round(low[0][0] / basis.omega0) == 2
    assert 2 <= low[0][0] / basis.omega0 <= 4
    two = tone_amplitude(spectrum, 2 * basis.omega0)
    assert two == pytest.approx(F * b ** 4 / 32 * abs(transfer(probe, 2 * basis.omega0)), rel=0.1)


def test_quadratic_response_scales_with_square(basis, probe):
    amplitudes = []
    for scale in (1.0, 0.5):
        phi_i, phi_j = two_tone_inputs(basis.omega0, amplitude_i=0.3 * scale, amplitude_j=0.3 * scale)
        spectrum = power_spectrum(simulate_readout(phi_i, phi_j, probe), 'hann')
        amplitudes.append([tone_amplitude(spectrum, k * basis.omega0) for k in (1, 6, 7, 8)])
    np.testing.assert_allclose(np.array(amplitudes[0]) / np.array(amplitudes[1]), 4.0, rtol=2e-2)


def test_linear_response_is_odd(basis, probe):
    phi_i, phi_j = two_tone_inputs(basis.omega0, amplitude_i=0.3, amplitude_j=0.2)
    config = probe.with_flux(0.0)
    forward = simulate_readout(phi_i, phi_j, config)
    flipped = simulate_readout(TimeSeries(dt=phi_i.dt, samples=-phi_i.samples),
                               TimeSeries(dt=phi_j.dt, samples=-phi_j.samples), config)
    np.testing.assert_allclose(flipped.samples, -forward.samples, rtol=0, atol=1e-15 * readout_prefactor(probe))


def test_linear_flux_single_peak(basis, probe):
    phi_i, phi_j = two_tone_inputs(basis.omega0, amplitude_i=0.3, amplitude_j=0.0)
    current = simulate_readout(phi_i, phi_j, probe.with_flux(0.0))
    spectrum = power_spectrum(current, 'hann')
    peaks = find_spectral_peaks(spectrum, min_relative=1e-6)
    assert round(peaks[0][0] / basis.omega0) == 4
    expected = readout_prefactor(probe) * 0.1 * abs(transfer(probe, 4 * basis.omega0))
    assert tone_amplitude(spectrum, 4 * basis.omega0) == pytest.approx(expected, rel=1e-2)
    assert all(power < 1e-3 * peaks[0][1] for _, power in peaks[1:])


def test_chunked_filter_matches_single_pass(basis, probe):
    phi_i, phi_j = two_tone_inputs(basis.omega0, periods=4)
    whole = simulate_readout(phi_i, phi_j, probe)
    chunked = simulate_readout(phi_i, phi_j, probe, chunk_size=300)
    np.testing.assert_allclose(chunked.samples, whole.samples, rtol=0, atol=1e-12 * readout_prefactor(probe))


def test_two_pole_filter_starts_settled(probe):
    damping = ReadoutFilter(dataclasses.replace(probe, damping='two_pole'), 1e-10)
    output = damping.process(np.full(50, 3.0))
    np.testing.assert_allclose(output, 3.0)


def test_regime_and_sampling_guards(basis, probe):
    phi_i, phi_j = two_tone_inputs(basis.omega0, amplitude_i=2.0, amplitude_j=2.0)
    with pytest.raises(RegimeError):
        simulate_readout(phi_i, phi_j, probe)

    phi_i, phi_j = two_tone_inputs(basis.omega0, samples_per_period=60)
    with pytest.raises(SamplingError):
        simulate_readout(phi_i, phi_j, probe)

    short = TimeSeries(dt=phi_i.dt, samples=phi_i.samples[:100])
    with pytest.raises(ConfigError):
        simulate_readout(short, phi_j, probe)


# =============================================================================
# PREDICTED COMPONENTS AGAINST THE TIME DOMAIN
# =============================================================================

def _coherent_records(basis, probe, phi_ext):
    corr = _coherent(basis, {1: 0.5, 2: 0.4j, 3: -0.3 + 0.2j})
    coeffs = phase_observable_coefficients(basis, 4)
    dt, n = sampling_for(float(basis.omega[-1]), float(basis.omega[0]), probe.kappa_probe, samples_per_period=1024)
    phi_i = phase_series(corr, coeffs, dt, n)
    ground = TimeSeries(dt=dt, samples=np.zeros(n))
    config = probe.with_flux(phi_ext)
    measured = simulate_readout(phi_i, ground, config)
    predicted = synthesize(predicted_fourier_components(corr, coeffs, None, config), dt, n)
    return corr, coeffs, config, measured, predicted


def test_linear_response_matches_prediction(basis, probe):
    _, _, _, measured, predicted = _coherent_records(basis, probe, 0.0)
    settled = slice(1000, None)
    scale = np.max(np.abs(predicted.samples))
    np.testing.assert_allclose(measured.samples[settled], predicted.samples[settled], atol=1e-2 * scale)


def test_quadratic_response_matches_prediction(basis, probe):
    corr, coeffs, config, measured, predicted = _coherent_records(basis, probe, math.pi / 2)
    # the mean-field trace has no zero-point term
    scaled = scaled_coefficients(config, basis.omega, coeffs)
    classical = predicted.samples + 0.5 * readout_prefactor(config) * np.sum(scaled ** 2)
    settled = slice(1000, None)
    ac = classical[settled] - classical[settled].mean()
    np.testing.assert_allclose(measured.samples[settled], classical[settled], atol=1e-2 * np.max(np.abs(ac)))


def test_predicted_linear_components(basis, probe):
    corr = _coherent(basis, {2: 0.5j})
    coeffs = phase_observable_coefficients(basis, 4, 5)
    config = probe.with_flux(0.0)
    components = predicted_fourier_components(corr, coeffs, None, config)
    assert [component.label for component in components] == ['Q(2)']
    expected = (readout_prefactor(probe) * transfer(probe, basis.omega[1])
                * beta(probe, basis.omega[1]) * coeffs[1] * 2 * corr.Q[1])
    assert components[0].amplitude == pytest.approx(expected)


def test_predicted_quadratic_components(basis, probe):
    corr = _coherent(basis, {1: 1.0, 3: 1.0})
    coeffs = phase_observable_coefficients(basis, 4)
    components = {c.label: c for c in predicted_fourier_components(corr, coeffs, None, probe)}
    assert set(components) == {'DC', 'A(1,1)', 'A(1,3)', 'A(3,3)', 'N(1,3)'}
    scaled = scaled_coefficients(probe, basis.omega, coeffs)
    F = readout_prefactor(probe)
    assert components['DC'].amplitude == pytest.approx(
        vacuum_baseline(probe, scaled) - F * (scaled[0] ** 2 + scaled[2] ** 2))
    assert components['N(1,3)'].frequency == pytest.approx(basis.omega[2] - basis.omega[0])
    assert components['N(1,3)'].amplitude == pytest.approx(
        -2 * F * scaled[0] * scaled[2] * transfer(probe, basis.omega[2] - basis.omega[0]))


def test_vacuum_gives_only_dc(basis, probe):
    coeffs = phase_observable_coefficients(basis, 4, 9)
    components = predicted_fourier_components(_coherent(basis, {}), coeffs, None, probe)
    assert [component.label for component in components] == ['DC']
    scaled = scaled_coefficients(probe, basis.omega, coeffs)
    expected = readout_prefactor(probe) * (1 - 0.5 * np.sum(scaled ** 2))
    assert components[0].amplitude == pytest.approx(expected)
    assert components[0].amplitude.real < readout_prefactor(probe)


def test_squeezed_pair_adds_sum_component(basis, probe):
    coeffs = phase_observable_coefficients(basis, 4)
    xi = 0.3 * np.exp(0.5j)
    squeezed = correlations(TrialState.squeezed(np.zeros(basis.n_modes), {(3, 7): xi}, drive_mode=10), basis)
    baseline = {c.label for c in predicted_fourier_components(_coherent(basis, {}), coeffs, None, probe)}
    components = {c.label: c for c in predicted_fourier_components(squeezed, coeffs, None, probe)}
    assert set(components) - baseline == {'A(3,7)'}

    extra = components['A(3,7)']
    assert extra.frequency == pytest.approx(10 * basis.omega0, rel=2e-2)
    scaled = scaled_coefficients(probe, basis.omega, coeffs)
    anomalous = -0.5 * np.exp(0.5j) * np.sinh(0.6)
    expected = (-2 * readout_prefactor(probe) * scaled[2] * scaled[6]
                * transfer(probe, extra.frequency) * anomalous)
    assert extra.amplitude == pytest.approx(expected)


def test_flux_kind():
    assert flux_kind(0.0) == 'linear'
    assert flux_kind(math.pi / 2) == 'quadratic'
    with pytest.raises(ConfigError):
        flux_kind(0.3)


def test_merge_and_noise():
    components = [FourierComponent(1.0, 1.0, 'a'), FourierComponent(1.0 + 1e-9, 2.0, 'b'),
                  FourierComponent(5.0, 1j, 'c')]
    merged = merge_components(components, tolerance=1e-6)
    assert [(m.frequency, m.amplitude, m.label) for m in merged] == [(1.0, 3.0, 'a+b'), (5.0, 1j, 'c')]

    first = add_measurement_noise(components, 20.0, np.random.default_rng(3))
    second = add_measurement_noise(components, 20.0, np.random.default_rng(3))
    assert first == second
    assert add_measurement_noise(components, 300.0, np.random.default_rng(3))[2].amplitude == pytest.approx(1j)


# =============================================================================
# SPECTRA
# =============================================================================

@pytest.mark.parametrize("window", ['boxcar', 'rectangular', 'hann', 'hamming', 'blackman'])
def test_window_recovers_bin_centred_tone(window):
    dt = 1e-3
    n = 4096
    omega = 2 * math.pi * 64 / (n * dt)
    series = TimeSeries(dt=dt, samples=0.7 * np.cos(omega * np.arange(n) * dt + 0.4))
    spectrum = power_spectrum(series, window)
    assert tone_amplitude(spectrum, omega) == pytest.approx(0.7, rel=1e-9)
    assert parseval_error(series, spectrum) < 1e-10


def test_parseval_on_noise():
    rng = np.random.default_rng(11)
    series = TimeSeries(dt=0.01, samples=rng.normal(size=1001))
    assert parseval_error(series, power_spectrum(series, 'hann')) < 1e-10
    flat = power_spectrum(series, 'boxcar')
    assert flat.total_power() == pytest.approx(np.mean(series.samples ** 2))


def test_white_noise_spectrum_is_flat():
    rng = np.random.default_rng(8)
    dt = 1e-3
    series = TimeSeries(dt=dt, samples=rng.normal(0.0, 1.0, 2 ** 16))
    spectrum = power_spectrum(series, 'boxcar')
    level = dt / math.pi
    bands = np.array_split(spectrum.psd[1:-1], 8)
    np.testing.assert_allclose([band.mean() for band in bands], level, rtol=0.1)


def test_sampling_rule(basis, probe):
    dt, n = sampling_for(float(basis.omega[-1]), float(basis.omega[0]), probe.kappa_probe)
    assert dt == pytest.approx(2 * math.pi / (basis.omega[-1] * 64))
    assert n * dt >= 10 * 2 * math.pi / basis.omega[0]
    assert n * dt >= 50 / probe.kappa_probe
