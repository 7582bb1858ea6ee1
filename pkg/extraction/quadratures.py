"""
Quadrature Extraction
=====================
Recovers the complex quadrature amplitudes Q_n from one record of a node
phase ⟨φ_site⟩(t) = Σ_n γ_n(site)·2·Re(Q_n e^{−iω_n t}) by a linear
least-squares fit to cosines and sines at the known mode frequencies.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from circuit.ladder import ModeBasis
from config import Config
from errors import ConfigError
from probe.readout import TimeSeries

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureFit:
    """Fitted Q amplitudes; unrecoverable modes hold NaN"""
    Q: np.ndarray
    site: int
    unrecoverable: list = field(default_factory=list)
    residual_rms: float = 0.0


def extract_quadratures(record: TimeSeries, basis: ModeBasis, site: int) -> QuadratureFit:
    """Fit Σ_n c_n cos(ω_n t) + s_n sin(ω_n t) and divide out γ_n(site)

    Raises:
        ConfigError: record shorter than Config.MIN_RECORD_PERIODS periods of ω_1
    """
    basis.check_site(site)
    slowest_period = 2 * math.pi / basis.frequency(1)
    if record.duration < Config.MIN_RECORD_PERIODS * slowest_period:
        raise ConfigError(
            f"record of {record.duration:.4e} s covers fewer than "
            f"{Config.MIN_RECORD_PERIODS} periods of ω_1"
        )

    t = record.times
    phases = np.outer(t, basis.omega)
    design = np.hstack([np.cos(phases), np.sin(phases)])
    solution, _, _, _ = np.linalg.lstsq(design, record.samples, rcond=None)
    residual = record.samples - design @ solution

    n_modes = basis.n_modes
    cos_part, sin_part = solution[:n_modes], solution[n_modes:]
    gamma = np.asarray(basis.gamma[:, site - 1])
    floor = Config.GAMMA_FLOOR * float(np.max(np.abs(basis.gamma)))
    unrecoverable = [int(n) + 1 for n in np.nonzero(np.abs(gamma) < floor)[0]]

    with np.errstate(divide='ignore', invalid='ignore'):
        Q = (cos_part + 1j * sin_part) / (2 * gamma)
    for mode in unrecoverable:
        Q[mode - 1] = np.nan
        logger.warning(f"Mode {mode} has γ ≈ 0 at site {site}; its quadrature is unrecoverable here")

    return QuadratureFit(
        Q=Q, site=site, unrecoverable=unrecoverable,
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
    )


def best_quadrature_site(basis: ModeBasis) -> int:
    """Site maximizing min_n |γ_n(site)| over the retained modes"""
    weakest = np.min(np.abs(basis.gamma), axis=0)
    return int(np.argmax(weakest)) + 1
