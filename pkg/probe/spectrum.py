"""
Power Spectra
=============
One-sided windowed power spectral density of a TimeSeries and a peak finder.

Normalization: psd_k = c_k·|X_k|²/(ω_s·Σw²) with c_k = 2 except at DC and
Nyquist, X = rfft(x·w) and ω_s = 2π/dt. Frequencies are rad/s and

    Σ_k psd_k·Δω = Σ(x·w)²/Σw²

which is the mean square of x for a rectangular window.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from probe.readout import TimeSeries

logger = logging.getLogger(__name__)

WINDOW_ALIASES = {'rectangular': 'boxcar', 'rect': 'boxcar', 'hanning': 'hann'}

# Bins either side of a bin-centred tone that carry its power
_MAIN_LOBE = {'boxcar': 0, 'hann': 1, 'hamming': 1, 'blackman': 2}


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    psd: np.ndarray
    window: str = 'boxcar'

    @property
    def resolution(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0]) if len(self.frequencies) > 1 else 0.0

    def total_power(self) -> float:
        return float(np.sum(self.psd) * self.resolution)

    def bin_of(self, omega: float) -> int:
        return int(round(omega / self.resolution))


def _window_name(window: str) -> str:
    return WINDOW_ALIASES.get(window, window)


def power_spectrum(series: TimeSeries, window: str = 'hann') -> Spectrum:
    """Windowed one-sided power spectral density (rad/s axis)"""
    n = len(series)
    if n < 2:
        raise ValueError("power spectrum needs at least 2 samples")
    name = _window_name(window)
    weights = signal.get_window(name, n, fftbins=True)

    transform = np.fft.rfft(series.samples * weights)
    omega_s = 2 * math.pi / series.dt
    scale = np.full(len(transform), 2.0)
    scale[0] = 1.0
    if n % 2 == 0:
        scale[-1] = 1.0
    psd = scale * np.abs(transform) ** 2 / (omega_s * np.sum(weights ** 2))
    frequencies = 2 * math.pi * np.fft.rfftfreq(n, series.dt)
    return Spectrum(frequencies=frequencies, psd=psd, window=name)


def parseval_error(series: TimeSeries, spectrum: Spectrum) -> float:
    """Relative mismatch between the spectrum's total power and the windowed mean square"""
    weights = signal.get_window(spectrum.window, len(series), fftbins=True)
    expected = np.sum((series.samples * weights) ** 2) / np.sum(weights ** 2)
    if expected == 0:
        return abs(spectrum.total_power())
    return abs(spectrum.total_power() - expected) / expected


def find_spectral_peaks(spectrum: Spectrum, n_peaks: int = None, include_dc: bool = False,
                        min_relative: float = 1e-12) -> list:
    """Local maxima as (frequency, power) pairs sorted by power, strongest first

    Power is the PSD integrated over the window's main lobe, so a bin-centred
    tone of amplitude a reports a²/2.
    """
    psd = spectrum.psd
    lobe = _MAIN_LOBE.get(spectrum.window, 3)
    indices, _ = signal.find_peaks(psd, height=min_relative * float(psd.max()))
    indices = list(indices)
    if include_dc and len(psd) > 1 and psd[0] > psd[1]:
        indices.insert(0, 0)

    peaks = []
    for index in indices:
        low, high = max(index - lobe, 0), min(index + lobe + 1, len(psd))
        power = float(np.sum(psd[low:high]) * spectrum.resolution)
        peaks.append((float(spectrum.frequencies[index]), power))
    peaks.sort(key=lambda peak: (-peak[1], peak[0]))
    return peaks[:n_peaks] if n_peaks else peaks


def tone_amplitude(spectrum: Spectrum, omega: float) -> float:
    """Amplitude of a bin-centred tone at omega from its main-lobe power"""
    index = spectrum.bin_of(omega)
    lobe = _MAIN_LOBE.get(spectrum.window, 3)
    low, high = max(index - lobe, 0), min(index + lobe + 1, len(spectrum.psd))
    power = float(np.sum(spectrum.psd[low:high]) * spectrum.resolution)
    return math.sqrt(power) if index == 0 else math.sqrt(2 * power)
