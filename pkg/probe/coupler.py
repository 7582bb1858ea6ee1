"""
Probe Coupler, Tuner and Readout Loop
=====================================
Static relations of the classical probe: the coupler scale factor β(ω),
the flux-tuned junction current, the readout prefactor and the readout
transfer function, plus the design criteria the probe must satisfy.

Phase convention: a signal Re(amp·e^{−iωt}) passes a linear stage with
transfer H(ω) as Re(H(ω)·amp·e^{−iωt}).
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from circuit.ladder import ModeBasis
from config import Config
from errors import ConfigError, PoleProximityError
from units import REDUCED_FLUX_QUANTUM

logger = logging.getLogger(__name__)

DAMPING_MODELS = ('first_order', 'two_pole')
BETA_MODES = ('per_component', 'quasi_static')


@dataclass(frozen=True)
class ProbeConfig:
    """Probe circuit elements (SI units) and readout options"""
    C_S: float
    L_S: float
    C_X: float
    L_X: float
    EJ_P: float
    I_c: float
    M: float
    L_P: float
    C_P: float
    E_M: float
    phi_ext: float
    kappa_probe: float
    damping: str = 'first_order'
    beta_mode: str = 'per_component'

    def __post_init__(self):
        problems = []
        for name in ('C_S', 'L_S', 'C_X', 'L_X', 'EJ_P', 'I_c', 'M', 'L_P', 'C_P', 'E_M', 'kappa_probe'):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be strictly positive")
        if self.damping not in DAMPING_MODELS:
            problems.append(f"damping must be one of {DAMPING_MODELS}, got '{self.damping}'")
        if self.beta_mode not in BETA_MODES:
            problems.append(f"beta_mode must be one of {BETA_MODES}, got '{self.beta_mode}'")
        if problems:
            raise ConfigError("Invalid probe config: " + "; ".join(problems), problems=problems)

    def with_flux(self, phi_ext: float) -> 'ProbeConfig':
        return replace(self, phi_ext=phi_ext)


# =============================================================================
# COUPLER
# =============================================================================

def _beta_parts(config: ProbeConfig, omega):
    w2 = np.asarray(omega, dtype=float) ** 2
    numerator = 1.0 / config.L_S - config.C_S * w2
    denominator = (1.0 / config.L_S + 2.0 / config.L_X) - (config.C_S + 2 * config.C_X) * w2
    return numerator, denominator


def beta(config: ProbeConfig, omega, strict: bool = True):
    """Coupler scale factor β(ω) = (1/L_S − C_Sω²)/((1/L_S + 2/L_X) − (C_S + 2C_X)ω²)

    A pole cancelled by a numerator zero is removable and returns its limit
    C_S/(C_S + 2C_X).

    Args:
        config: probe parameters
        omega: angular frequency (scalar or array), ≥ 0
        strict: raise at an uncancelled pole; otherwise return NaN there

    Raises:
        PoleProximityError: |denominator| below Config.POLE_TOL relative scale
    """
    omega_arr = np.asarray(omega, dtype=float)
    if np.any(omega_arr < 0):
        raise ConfigError("beta needs non-negative frequencies")
    numerator, denominator = _beta_parts(config, omega_arr)
    scale = 1.0 / config.L_S + 2.0 / config.L_X
    near_pole = np.abs(denominator) < Config.POLE_TOL * scale
    removable = near_pole & (np.abs(numerator) < Config.POLE_TOL / config.L_S)

    with np.errstate(divide='ignore', invalid='ignore'):
        value = numerator / denominator
    value = np.where(removable, config.C_S / (config.C_S + 2 * config.C_X), value)

    blocked = near_pole & ~removable
    if np.any(blocked):
        if strict:
            where = np.atleast_1d(omega_arr)[np.atleast_1d(blocked)]
            raise PoleProximityError(
                f"coupler pole at ω = {np.min(where):.4e} rad/s lies on an evaluated frequency",
                omega=float(np.min(where)),
            )
        value = np.where(blocked, np.nan, value)

    return float(value) if np.ndim(value) == 0 else value


def coupler_resonance(config: ProbeConfig) -> float:
    """ω_x = 1/√(C_X L_X)"""
    return 1.0 / math.sqrt(config.C_X * config.L_X)


def coupler_pole(config: ProbeConfig):
    """Frequency where β's denominator vanishes, or None when the numerator cancels it"""
    omega_pole = math.sqrt((1.0 / config.L_S + 2.0 / config.L_X) / (config.C_S + 2 * config.C_X))
    numerator, _ = _beta_parts(config, omega_pole)
    if abs(float(numerator)) < Config.POLE_TOL / config.L_S:
        return None
    return omega_pole


# =============================================================================
# TUNER / READOUT
# =============================================================================

def junction_current(delta_phi_scaled, phi_ext: float, I_c: float):
    """I_J = I_c·sin(Δφ̃ + φ_ext)"""
    return I_c * np.sin(np.asarray(delta_phi_scaled) + phi_ext)


def tuner_phase(config: ProbeConfig, I_J):
    """θ_p = E_JP·I_J/(E_M·I_c)"""
    return config.EJ_P * np.asarray(I_J) / (config.E_M * config.I_c)


def readout_prefactor(config: ProbeConfig) -> float:
    """Full-scale readout current Φ0·E_JP/(2π·L_P·E_M)"""
    return REDUCED_FLUX_QUANTUM * config.EJ_P / (config.L_P * config.E_M)


def readout_impedance(config: ProbeConfig) -> float:
    """Z_P = √(L_P/C_P)"""
    return math.sqrt(config.L_P / config.C_P)


def readout_frequency(config: ProbeConfig) -> float:
    """ω_P = 1/√(L_P C_P)"""
    return 1.0 / math.sqrt(config.L_P * config.C_P)


def transfer(config: ProbeConfig, omega):
    """Readout transfer function for the configured damping model

    first_order: κ/(κ − iω)
    two_pole:    ω_P²/(ω_P² − ω² − iκω)
    """
    omega = np.asarray(omega, dtype=float)
    kappa = config.kappa_probe
    if config.damping == 'first_order':
        return kappa / (kappa - 1j * omega)
    w_p2 = readout_frequency(config) ** 2
    return w_p2 / (w_p2 - omega ** 2 - 1j * kappa * omega)


# =============================================================================
# DESIGN CRITERIA
# =============================================================================

def check_criteria(config: ProbeConfig, basis: ModeBasis, band_modes: int = None) -> list:
    """Probe design checks against a system basis

    Returns a list of findings, each {'criterion', 'ok', 'value', 'message'}.
    The ω_P/ω0 ratio is reported without a pass/fail verdict.
    """
    band_modes = basis.n_modes if band_modes is None else band_modes
    findings = []

    Z_P = readout_impedance(config)
    ok = Z_P >= Config.IMPEDANCE_RATIO * basis.Z0
    findings.append({
        'criterion': 'impedance',
        'ok': ok,
        'value': Z_P / basis.Z0 if basis.Z0 else None,
        'message': f"Z_P = {Z_P:.4g} Ω against Z0 = {basis.Z0:.4g} Ω",
    })

    ratio = readout_frequency(config) / basis.omega0
    findings.append({
        'criterion': 'readout_frequency',
        'ok': None,
        'value': ratio,
        'message': f"ω_P/ω0 = {ratio:.4g}",
    })

    pole = coupler_pole(config)
    band_top = float(basis.omega[band_modes - 1])
    in_band = pole is not None and pole <= band_top
    findings.append({
        'criterion': 'coupler_pole',
        'ok': not in_band,
        'value': pole,
        'message': ("coupler pole cancelled by the numerator zero" if pole is None
                    else f"coupler pole at {pole:.4e} rad/s, band top {band_top:.4e} rad/s"),
    })

    full_scale = readout_prefactor(config)
    findings.append({
        'criterion': 'full_scale_current',
        'ok': full_scale >= Config.MEASURABLE_CURRENT,
        'value': full_scale,
        'message': f"full-scale readout current {full_scale:.4e} A",
    })

    for finding in findings:
        if finding['ok'] is False:
            logger.warning(f"Probe criterion '{finding['criterion']}' not met: {finding['message']}")
    return findings
