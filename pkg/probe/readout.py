"""
Probe Readout Simulation
========================
Classical time-domain model of the probe: the phase difference of two
ladder nodes is scaled by the coupler, drives the flux-tuned junction, and
reaches the readout loop through a damping channel with rate κ_probe.

Test signals and mean-field node phases are generated here as well.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from config import Config
from errors import ConfigError, PoleProximityError, RegimeError, SamplingError
from probe.coupler import ProbeConfig, beta, readout_frequency, readout_prefactor

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real signal starting at t = 0"""
    dt: float
    samples: np.ndarray
    unit: str = 'rad'

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if not self.dt > 0:
            raise ConfigError(f"dt={self.dt} must be positive")
        if samples.ndim != 1:
            raise ConfigError("time series must be one-dimensional")
        if not np.all(np.isfinite(samples)):
            raise ConfigError("time series contains non-finite samples")
        object.__setattr__(self, 'samples', samples)

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt

    def __sub__(self, other: 'TimeSeries') -> 'TimeSeries':
        _check_aligned(self, other)
        return TimeSeries(dt=self.dt, samples=self.samples - other.samples, unit=self.unit)


def _check_aligned(first: TimeSeries, second: TimeSeries):
    if len(first) != len(second):
        raise ConfigError(f"time series lengths differ ({len(first)} vs {len(second)})")
    if not math.isclose(first.dt, second.dt, rel_tol=1e-12):
        raise ConfigError(f"time series spacings differ ({first.dt} vs {second.dt})")


# =============================================================================
# DAMPING CHANNEL
# =============================================================================

class ReadoutFilter:
    """Stateful damping channel; feed consecutive chunks of one run through `process`

    first_order: y_k = a·y_{k−1} + (1 − a)·x_k with a = e^{−κ dt}
    two_pole:    bilinear discretization of ω_P²/(s² + κs + ω_P²)
    The filter starts in the steady state of the first sample it sees.
    """

    def __init__(self, config: ProbeConfig, dt: float):
        if config.damping == 'first_order':
            decay = math.exp(-config.kappa_probe * dt)
            self.b = np.array([1.0 - decay])
            self.a = np.array([1.0, -decay])
        else:
            w_p2 = readout_frequency(config) ** 2
            self.b, self.a = signal.bilinear([w_p2], [1.0, config.kappa_probe, w_p2], fs=1.0 / dt)
        self._zi_unit = signal.lfilter_zi(self.b, self.a)
        self._state = None

    def process(self, chunk: np.ndarray) -> np.ndarray:
        chunk = np.asarray(chunk, dtype=float)
        if len(chunk) == 0:
            return chunk
        if self._state is None:
            self._state = self._zi_unit * chunk[0]
        output, self._state = signal.lfilter(self.b, self.a, chunk, zi=self._state)
        return output


# =============================================================================
# SIMULATION
# =============================================================================

def dominant_frequency(series: TimeSeries) -> float:
    """Highest angular frequency carrying more than the spectral floor of the peak power

    Blackman-windowed: off-bin tones would otherwise leak above the floor all
    the way to Nyquist.
    """
    samples = series.samples - series.samples.mean()
    weights = signal.get_window('blackman', len(series), fftbins=True)
    spectrum = np.abs(np.fft.rfft(samples * weights)) ** 2
    if spectrum.max() == 0:
        return 0.0
    significant = np.nonzero(spectrum > Config.SPECTRAL_CONTENT_FLOOR * spectrum.max())[0]
    return float(2 * math.pi * np.fft.rfftfreq(len(series), series.dt)[significant[-1]])


def scale_by_coupler(delta_phi: TimeSeries, config: ProbeConfig) -> np.ndarray:
    """Δφ̃ = β·Δφ, per Fourier component or with the ω = 0 value"""
    if config.beta_mode == 'quasi_static':
        return beta(config, 0.0) * delta_phi.samples

    spectrum = np.fft.rfft(delta_phi.samples)
    omega = 2 * math.pi * np.fft.rfftfreq(len(delta_phi), delta_phi.dt)
    factors = beta(config, omega, strict=False)
    blocked = np.isnan(factors)
    if np.any(blocked):
        power = np.abs(spectrum) ** 2
        if np.any(power[blocked] > Config.SPECTRAL_CONTENT_FLOOR * power.max()):
            raise PoleProximityError("input has spectral content at the coupler pole")
        factors = np.where(blocked, 0.0, factors)
    return np.fft.irfft(spectrum * factors, n=len(delta_phi))


def simulate_readout(phi_i: TimeSeries, phi_j: TimeSeries, config: ProbeConfig,
                     chunk_size: int = None) -> TimeSeries:
    """Readout current I_P(t) for node-phase records φ_i(t), φ_j(t)

    I_P = Φ0·E_JP/(2π·L_P·E_M)·sin(β·(φ_i − φ_j) + φ_ext), passed through the
    damping channel.

    Raises:
        SamplingError: fewer than 20 samples per period of the fastest input component
        RegimeError: β·max|Δφ| reaches 1
    """
    delta_phi = phi_i - phi_j

    fastest = dominant_frequency(delta_phi)
    if fastest > 0:
        per_period = 2 * math.pi / (fastest * delta_phi.dt)
        if per_period < Config.MIN_SAMPLES_PER_INPUT_PERIOD:
            raise SamplingError(
                f"{per_period:.1f} samples per period at {fastest:.4e} rad/s; "
                f"need at least {Config.MIN_SAMPLES_PER_INPUT_PERIOD}",
                omega=fastest,
            )

    scaled = scale_by_coupler(delta_phi, config)
    peak = float(np.max(np.abs(scaled)))
    if peak >= Config.BETA_LIMIT:
        raise RegimeError(f"β·max|Δφ| = {peak:.3f} outside the small-signal regime", beta_dphi=peak)
    if peak > Config.BETA_WARN:
        logger.warning(f"β·max|Δφ| = {peak:.3f} exceeds {Config.BETA_WARN}; higher-order terms grow")

    drive = readout_prefactor(config) * np.sin(scaled + config.phi_ext)

    damping = ReadoutFilter(config, delta_phi.dt)
    chunk_size = chunk_size or len(drive)
    output = np.concatenate([
        damping.process(drive[start:start + chunk_size])
        for start in range(0, len(drive), chunk_size)
    ])
    logger.debug(f"Readout: {len(output)} samples, β·max|Δφ| = {peak:.3f}, φ_ext = {config.phi_ext:.4f}")
    return TimeSeries(dt=delta_phi.dt, samples=output, unit='A')


# =============================================================================
# INPUT SIGNALS
# =============================================================================

def sampling_for(omega_max: float, omega_min: float, kappa: float = None,
                 samples_per_period: int = None):
    """(dt, n_samples): samples_per_period per fastest period, ≥ 50/κ and ≥ 10 slowest periods"""
    samples_per_period = samples_per_period or Config.SAMPLES_PER_PERIOD
    dt = 2 * math.pi / (omega_max * samples_per_period)
    duration = Config.MIN_RECORD_PERIODS * 2 * math.pi / omega_min
    if kappa:
        duration = max(duration, Config.DURATION_KAPPA_FACTOR / kappa)
    return dt, int(math.ceil(duration / dt))


def two_tone_inputs(omega0: float, amplitude_i: float = 0.6, amplitude_j: float = 0.6,
                    harmonic_i: int = 4, harmonic_j: int = 3,
                    samples_per_period: int = 512, periods: int = 16):
    """Single-tone node phases φ_i = a_i cos(h_i ω0 t), φ_j = a_j cos(h_j ω0 t)

    samples_per_period counts samples per period of ω0; an integer number of
    ω0 periods puts every mixing product on a frequency bin.
    """
    dt = 2 * math.pi / (omega0 * samples_per_period)
    t = np.arange(samples_per_period * periods) * dt
    phi_i = TimeSeries(dt=dt, samples=amplitude_i * np.cos(harmonic_i * omega0 * t))
    phi_j = TimeSeries(dt=dt, samples=amplitude_j * np.cos(harmonic_j * omega0 * t))
    return phi_i, phi_j


def phase_series(corr, coeffs, dt: float, n_samples: int) -> TimeSeries:
    """Mean-field node phase ⟨φ⟩(t) = Σ_n c_n·2·Re(Q_n e^{−iω_n t})"""
    coeffs = np.asarray(coeffs, dtype=float)
    t = np.arange(n_samples) * dt
    phases = np.exp(-1j * np.outer(t, corr.omega))
    return TimeSeries(dt=dt, samples=2 * np.real(phases @ (coeffs * corr.Q)))
