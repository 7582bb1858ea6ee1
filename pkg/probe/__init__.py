"""
Probe Module
============
Classical probe circuit: coupler scaling, flux-tuned junction, damped
readout loop, power spectra and predicted readout components.
"""

from probe.coupler import (
    ProbeConfig,
    beta,
    check_criteria,
    coupler_pole,
    coupler_resonance,
    junction_current,
    readout_frequency,
    readout_impedance,
    readout_prefactor,
    transfer,
    tuner_phase,
)
from probe.readout import (
    ReadoutFilter,
    TimeSeries,
    phase_series,
    sampling_for,
    simulate_readout,
    two_tone_inputs,
)
from probe.spectrum import Spectrum, find_spectral_peaks, parseval_error, power_spectrum, tone_amplitude
from probe.components import (
    FourierComponent,
    add_measurement_noise,
    flux_kind,
    merge_components,
    predicted_fourier_components,
    scaled_coefficients,
    synthesize,
    vacuum_baseline,
)

__all__ = [
    'ProbeConfig',
    'ReadoutFilter',
    'TimeSeries',
    'Spectrum',
    'FourierComponent',
    'add_measurement_noise',
    'beta',
    'check_criteria',
    'coupler_pole',
    'coupler_resonance',
    'find_spectral_peaks',
    'flux_kind',
    'junction_current',
    'merge_components',
    'parseval_error',
    'phase_series',
    'power_spectrum',
    'predicted_fourier_components',
    'readout_frequency',
    'readout_impedance',
    'readout_prefactor',
    'sampling_for',
    'scaled_coefficients',
    'simulate_readout',
    'synthesize',
    'tone_amplitude',
    'transfer',
    'tuner_phase',
    'two_tone_inputs',
    'vacuum_baseline',
]
