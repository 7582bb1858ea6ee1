"""
LC-Ladder Normal Modes
======================
Builds the normal-mode basis of a uniform LC ladder terminated at both ends
(φ_0 = φ_{N+1} = 0).

Mode indices are 1-based everywhere (n = 1..N); arrays are stored 0-based,
so mode n lives at row n - 1. Frequencies are rad/s, energies joules.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from config import Config
from errors import ConfigError
from units import E_CHARGE, HBAR, REDUCED_FLUX_QUANTUM

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LadderConfig:
    """Circuit parameters of the ladder, its impurity junction and the drive"""
    N: int
    L: float
    C: float
    EJ_imp: float
    i0: int
    j0: int
    phi_imp: float
    kappa: float
    drive_mode: int
    Omega0: float
    n_modes: int
    fn_denominator: str = 'derived'
    g: Optional[float] = None
    Gamma: Optional[float] = None
    omega0_table: Optional[float] = None

    def __post_init__(self):
        problems = []
        if self.N < 1:
            problems.append(f"N={self.N} must be >= 1")
        if not (1 <= self.i0 <= self.N and 1 <= self.j0 <= self.N):
            problems.append(f"impurity nodes ({self.i0}, {self.j0}) outside 1..{self.N}")
        if self.i0 == self.j0:
            problems.append("impurity nodes must differ")
        if self.n_modes > self.N:
            problems.append(f"n_modes={self.n_modes} exceeds N={self.N}")
        if not 1 <= self.drive_mode <= self.n_modes:
            problems.append(f"drive_mode={self.drive_mode} outside 1..n_modes={self.n_modes}")
        for name in ('L', 'C', 'kappa', 'Omega0'):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be strictly positive")
        if self.fn_denominator not in Config.FN_DENOMINATORS:
            problems.append(f"fn_denominator must be one of {Config.FN_DENOMINATORS}, "
                            f"got '{self.fn_denominator}'")
        if problems:
            raise ConfigError("Invalid ladder config: " + "; ".join(problems), problems=problems)

    @property
    def E_C(self) -> float:
        """Charging energy 4e²/(2C)"""
        return 4 * E_CHARGE ** 2 / (2 * self.C)

    @property
    def E_L(self) -> float:
        """Inductive energy (Φ0/2π)²/(2L)"""
        return REDUCED_FLUX_QUANTUM ** 2 / (2 * self.L)

    @property
    def omega0(self) -> float:
        """Fundamental spacing π/((N+1)√(LC))"""
        return math.pi / ((self.N + 1) * math.sqrt(self.L * self.C))

    @property
    def Z0(self) -> float:
        """Characteristic impedance √(L/C)"""
        return math.sqrt(self.L / self.C)

    @property
    def g_derived(self) -> float:
        """E_J (E_C/E_L)^{3/4}"""
        return self.EJ_imp * (self.E_C / self.E_L) ** 0.75

    @property
    def g_effective(self) -> float:
        return self.g if self.g is not None else self.g_derived


@dataclass(frozen=True, eq=False)
class ModeBasis:
    """Normal-mode data for the retained low-lying modes"""
    N: int
    omega: np.ndarray
    X: np.ndarray
    phi_zpf: np.ndarray
    n_zpf: np.ndarray
    gamma: np.ndarray
    omega0: float
    Z0: float = field(default=0.0)

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def modes(self) -> np.ndarray:
        """1-based mode labels"""
        return np.arange(1, self.n_modes + 1)

    def frequency(self, n: int) -> float:
        return float(self.omega[n - 1])

    def mode_shape(self, n: int, sites) -> np.ndarray:
        """X_n evaluated at arbitrary sites, boundary sites 0 and N+1 included"""
        sites = np.asarray(sites, dtype=float)
        return math.sqrt(2.0 / (self.N + 1)) * np.sin(n * math.pi * sites / (self.N + 1))

    def check_site(self, site: int, name: str = 'site'):
        if not 1 <= site <= self.N:
            raise ConfigError(f"{name}={site} outside 1..{self.N}", field=name)


def build_mode_basis(config: LadderConfig) -> ModeBasis:
    """Normal modes, profiles and zero-point amplitudes of the ladder

    ω_n = (2/√(LC))·sin(nπ/(2N+2)),  X_n(i) = √(2/(N+1))·sin(nπi/(N+1))
    φ_zpf(m) = √((N+1)/(mπ))·(2E_C/E_L)^{1/4}
    n_zpf(m) = √(mπ/(N+1))·(E_L/(32E_C))^{1/4}
    """
    N = config.N
    if config.n_modes > N:
        raise ConfigError(f"n_modes={config.n_modes} exceeds N={N}")

    n = np.arange(1, config.n_modes + 1, dtype=float)
    sites = np.arange(1, N + 1, dtype=float)

    omega = 2.0 / math.sqrt(config.L * config.C) * np.sin(n * math.pi / (2 * N + 2))
    X = math.sqrt(2.0 / (N + 1)) * np.sin(np.outer(n, sites) * math.pi / (N + 1))

    ratio = config.E_C / config.E_L
    phi_zpf = np.sqrt((N + 1) / (n * math.pi)) * (2 * ratio) ** 0.25
    n_zpf = np.sqrt(n * math.pi / (N + 1)) * (1.0 / (32 * ratio)) ** 0.25
    gamma = phi_zpf[:, None] * X

    for array in (omega, X, phi_zpf, n_zpf, gamma):
        array.setflags(write=False)

    basis = ModeBasis(
        N=N, omega=omega, X=X, phi_zpf=phi_zpf, n_zpf=n_zpf,
        gamma=gamma, omega0=config.omega0, Z0=config.Z0,
    )
    logger.debug(f"Mode basis: N={N}, n_modes={config.n_modes}, ω0={basis.omega0:.4e} rad/s")
    return basis


def phase_observable_coefficients(basis: ModeBasis, site_i: int, site_j: int = None) -> np.ndarray:
    """γ coefficients c_n with φ_i (or Δφ_ij) = Σ_n c_n (a_n† + a_n)"""
    basis.check_site(site_i, 'site_i')
    coeffs = np.array(basis.gamma[:, site_i - 1])
    if site_j is not None:
        basis.check_site(site_j, 'site_j')
        coeffs = coeffs - basis.gamma[:, site_j - 1]
    return coeffs


def orthonormality_error(basis: ModeBasis) -> float:
    """max |Σ_i X_n(i) X_m(i) - δ_nm| over the retained modes"""
    gram = basis.X @ basis.X.T
    return float(np.max(np.abs(gram - np.eye(basis.n_modes))))


def circuit_summary(config: LadderConfig, basis: ModeBasis) -> dict:
    """Derived constants, tabulated-value discrepancies and hierarchy checks"""
    g = config.g_effective
    summary = {
        'omega0_derived': basis.omega0,
        'omega0_table': config.omega0_table,
        'omega0_discrepancy': None,
        'Z0': config.Z0,
        'E_C': config.E_C,
        'E_L': config.E_L,
        'g_derived': config.g_derived,
        'g_effective': g,
        'warnings': [],
    }
    if config.omega0_table:
        ratio = basis.omega0 / config.omega0_table
        summary['omega0_discrepancy'] = ratio
        if abs(ratio - 1) > 0.05:
            message = (f"tabulated ω0 differs from the dispersion formula by a factor {ratio:.3g}; "
                       f"derived value is used")
            summary['warnings'].append(message)
            logger.warning(message)

    coupling_rate = g / HBAR
    if coupling_rate > Config.HIERARCHY_RATIO * basis.omega0:
        summary['warnings'].append(f"g/ħ = {coupling_rate:.3e} rad/s is not small against ω0")
    if config.kappa > Config.HIERARCHY_RATIO * basis.omega0:
        summary['warnings'].append(f"κ = {config.kappa:.3e} /s is not small against ω0")
    summary['coupling_ratio'] = coupling_rate / basis.omega0
    summary['loss_ratio'] = config.kappa / basis.omega0
    return summary
