"""
Predicted Readout Components
============================
Fourier components of the mean readout current for a quantum state of the
ladder, expanded to second order in the scaled phase difference
Δφ̃ = Σ_n c̃_n (a_n + a_n†), c̃_n = β(ω_n)(γ_n(i) − γ_n(j)).

φ_ext = 0     I_P ≈ F·⟨Δφ̃⟩: one component per mode at ω_n
φ_ext = π/2   I_P ≈ F·(1 − ½⟨Δφ̃²⟩): a DC term carrying the zero-point sum
              plus normal (ω_m − ω_n) and anomalous (ω_n + ω_m) terms

Every component is Re(amplitude·e^{−iωt}) with the readout transfer applied.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from errors import ConfigError
from probe.coupler import ProbeConfig, beta, readout_prefactor, transfer
from probe.readout import TimeSeries

logger = logging.getLogger(__name__)

LINEAR_FLUX = 0.0
QUADRATIC_FLUX = math.pi / 2


@dataclass(frozen=True)
class FourierComponent:
    frequency: float
    amplitude: complex
    label: str = ''


def flux_kind(phi_ext: float) -> str:
    """'linear' for φ_ext = 0, 'quadratic' for φ_ext = π/2"""
    if math.isclose(phi_ext, LINEAR_FLUX, abs_tol=1e-12):
        return 'linear'
    if math.isclose(phi_ext, QUADRATIC_FLUX, abs_tol=1e-12):
        return 'quadratic'
    raise ConfigError(f"phi_ext={phi_ext:.6g} rad: only 0 and π/2 have a component expansion",
                      field='probe.phi_ext')


def scaled_coefficients(config: ProbeConfig, omega, coeffs_i, coeffs_j=None) -> np.ndarray:
    """c̃_n = β(ω_n)·(γ_n(i) − γ_n(j)); coeffs_j None means the ground node"""
    coeffs = np.asarray(coeffs_i, dtype=float)
    if coeffs_j is not None:
        coeffs = coeffs - np.asarray(coeffs_j, dtype=float)
    frequencies = np.zeros_like(omega) if config.beta_mode == 'quasi_static' else omega
    return beta(config, frequencies) * coeffs


def vacuum_baseline(config: ProbeConfig, scaled) -> float:
    """DC current of the vacuum at φ_ext = π/2: F·(1 − ½Σc̃²)"""
    return readout_prefactor(config) * (1.0 - 0.5 * float(np.sum(np.asarray(scaled) ** 2)))


def predicted_fourier_components(corr, coeffs_i, coeffs_j, config: ProbeConfig,
                                 keep_zero: bool = False) -> list:
    """Readout Fourier components for a CorrelationSet

    Args:
        corr: correlators of the ladder state
        coeffs_i, coeffs_j: γ_n(i), γ_n(j) (coeffs_j None for a node-to-ground probe)
        config: probe parameters; phi_ext selects the expansion
        keep_zero: keep components whose amplitude is exactly zero

    Returns:
        list of FourierComponent, one per contributing correlator
    """
    kind = flux_kind(config.phi_ext)
    omega = np.asarray(corr.omega, dtype=float)
    scaled = scaled_coefficients(config, omega, coeffs_i, coeffs_j)
    F = readout_prefactor(config)
    components = []

    if kind == 'linear':
        H = transfer(config, omega)
        for index in range(len(omega)):
            amplitude = F * H[index] * scaled[index] * 2 * corr.Q[index]
            components.append(FourierComponent(float(omega[index]), complex(amplitude), f"Q({index + 1})"))
    else:
        dc = vacuum_baseline(config, scaled) - F * float(np.sum(scaled ** 2 * np.real(np.diag(corr.N))))
        components.append(FourierComponent(0.0, complex(dc), 'DC'))
        n_modes = len(omega)
        for i in range(n_modes):
            for j in range(i, n_modes):
                weight = 1.0 if i == j else 2.0
                coefficient = -weight * F * scaled[i] * scaled[j]
                sum_freq = omega[i] + omega[j]
                components.append(FourierComponent(
                    float(sum_freq), complex(coefficient * transfer(config, sum_freq) * corr.A[i, j]),
                    f"A({i + 1},{j + 1})",
                ))
                if i != j:
                    diff_freq = omega[j] - omega[i]
                    components.append(FourierComponent(
                        float(diff_freq), complex(coefficient * transfer(config, diff_freq) * corr.N[i, j]),
                        f"N({i + 1},{j + 1})",
                    ))

    if not keep_zero:
        components = [component for component in components if component.amplitude != 0]
    logger.debug(f"Predicted {len(components)} components at φ_ext = {config.phi_ext:.4f}")
    return components


def merge_components(components: list, tolerance: float = 0.0) -> list:
    """Sum components whose frequencies lie within tolerance (what a spectrum analyser sees)"""
    merged = []
    for component in sorted(components, key=lambda c: c.frequency):
        if merged and component.frequency - merged[-1][0] <= tolerance:
            frequency, amplitude, labels = merged[-1]
            merged[-1] = (frequency, amplitude + component.amplitude, labels + [component.label])
        else:
            merged.append((component.frequency, component.amplitude, [component.label]))
    return [FourierComponent(frequency, amplitude, '+'.join(labels)) for frequency, amplitude, labels in merged]


def synthesize(components: list, dt: float, n_samples: int, unit: str = 'A') -> TimeSeries:
    """Time series Σ Re(amplitude·e^{−iωt})"""
    t = np.arange(n_samples) * dt
    samples = np.zeros(n_samples)
    for component in components:
        samples += np.real(component.amplitude * np.exp(-1j * component.frequency * t))
    return TimeSeries(dt=dt, samples=samples, unit=unit)


def add_measurement_noise(components: list, snr_db: float, rng: np.random.Generator) -> list:
    """Complex Gaussian noise on every component, SNR relative to the RMS component amplitude"""
    amplitudes = np.array([component.amplitude for component in components], dtype=complex)
    if len(amplitudes) == 0:
        return []
    rms = math.sqrt(float(np.mean(np.abs(amplitudes) ** 2)))
    sigma = rms * 10 ** (-snr_db / 20) / math.sqrt(2)
    noise = rng.normal(0.0, sigma, len(amplitudes)) + 1j * rng.normal(0.0, sigma, len(amplitudes))
    return [
        FourierComponent(component.frequency, complex(component.amplitude + delta), component.label)
        for component, delta in zip(components, noise)
    ]
