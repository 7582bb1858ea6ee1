"""
Golden-Rule Rate Model
======================
Population flow between ladder modes through the impurity's down-conversion
channels, plus a constant pump on the driven mode and photon loss κ.

For each channel l -> (n, m) with n + m = l the net event rate is

    W = Γ·A_nml²·[(N_n+1)(N_m+1)N_l − N_n N_m (N_l+1)]

Daughters follow the ordered-pair sum over (m, l): each of n and m gains W.
A self pair (n = m) appears once in that sum, so the parent l loses W for
n < m and W/2 for n = m. This keeps Σ_n n·N_n unchanged by down-conversion.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from circuit.coupling import CouplingTensor
from circuit.ladder import LadderConfig, ModeBasis
from errors import ConfigError
from units import HBAR

logger = logging.getLogger(__name__)


def default_gamma(g: float, omega0: float) -> float:
    """Γ = g²/(ħ²ω0)"""
    return (g / HBAR) ** 2 / omega0


@dataclass(eq=False)
class RateModel:
    """Rate-equation parameters; index arrays are derived from the tensor"""
    tensor: CouplingTensor
    Gamma: float
    kappa: float
    drive_mode: int
    Omega0: float
    n_modes: int = None

    _n: np.ndarray = field(init=False, repr=False)
    _m: np.ndarray = field(init=False, repr=False)
    _l: np.ndarray = field(init=False, repr=False)
    _rate: np.ndarray = field(init=False, repr=False)
    _parent_share: np.ndarray = field(init=False, repr=False)
    _distinct: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.Gamma < 0 or self.kappa < 0:
            raise ConfigError(f"Gamma={self.Gamma} and kappa={self.kappa} must be non-negative")
        if self.Omega0 < 0:
            raise ConfigError(f"Omega0={self.Omega0} must be non-negative")
        if self.n_modes is None:
            self.n_modes = self.tensor.n_modes
        if not 1 <= self.drive_mode <= self.n_modes:
            raise ConfigError(f"drive_mode={self.drive_mode} outside 1..{self.n_modes}")

        n, m, l, values = self.tensor.triples()
        if len(l) and l.max() > self.n_modes:
            raise ConfigError(f"tensor references mode {l.max()} beyond n_modes={self.n_modes}")
        self._n, self._m, self._l = n - 1, m - 1, l - 1
        self._rate = self.Gamma * values ** 2
        self._distinct = (n != m).astype(float)
        self._parent_share = np.where(n == m, 0.5, 1.0)

    @classmethod
    def from_config(cls, config: LadderConfig, basis: ModeBasis, tensor: CouplingTensor) -> 'RateModel':
        """Rate model using Γ = g²/(ħ²ω0) unless the config overrides Γ"""
        if config.Gamma is not None:
            gamma = config.Gamma
            logger.info(f"Using Γ override {gamma:.4e} /s")
        else:
            gamma = default_gamma(tensor.g, basis.omega0)
            logger.info(f"Using default Γ = g²/(ħ²ω0) = {gamma:.4e} /s")
        return cls(
            tensor=tensor, Gamma=gamma, kappa=config.kappa,
            drive_mode=config.drive_mode, Omega0=config.Omega0, n_modes=basis.n_modes,
        )

    def with_rates(self, Gamma: float = None, kappa: float = None, Omega0: float = None) -> 'RateModel':
        return RateModel(
            tensor=self.tensor,
            Gamma=self.Gamma if Gamma is None else Gamma,
            kappa=self.kappa if kappa is None else kappa,
            drive_mode=self.drive_mode,
            Omega0=self.Omega0 if Omega0 is None else Omega0,
            n_modes=self.n_modes,
        )

    def _check(self, populations) -> np.ndarray:
        populations = np.asarray(populations, dtype=float)
        if populations.shape != (self.n_modes,):
            raise ConfigError(
                f"population vector has shape {populations.shape}, expected ({self.n_modes},)"
            )
        return populations

    def event_rates(self, populations: np.ndarray) -> np.ndarray:
        """Net rate W per stored channel"""
        Nn, Nm, Nl = populations[self._n], populations[self._m], populations[self._l]
        return self._rate * ((Nn + 1) * (Nm + 1) * Nl - Nn * Nm * (Nl + 1))

    def rhs(self, populations) -> np.ndarray:
        """Full dN/dt: down-conversion + pump − κN"""
        populations = self._check(populations)
        derivative = downconversion_rhs(populations, self) - self.kappa * populations
        derivative[self.drive_mode - 1] += self.Omega0
        return derivative

    def jacobian(self, populations) -> np.ndarray:
        """∂(dN/dt)/∂N for the Newton refinement"""
        populations = self._check(populations)
        Nn, Nm, Nl = populations[self._n], populations[self._m], populations[self._l]
        dW_dn = self._rate * (Nl - Nm)
        dW_dm = self._rate * (Nl - Nn)
        dW_dl = self._rate * (1 + Nn + Nm)

        jac = -self.kappa * np.eye(self.n_modes)
        for target, weight in ((self._n, 1.0), (self._m, self._distinct), (self._l, -self._parent_share)):
            for source, partial in ((self._n, dW_dn), (self._m, dW_dm), (self._l, dW_dl)):
                np.add.at(jac, (target, source), weight * partial)
        return jac


def downconversion_rhs(populations, model: RateModel) -> np.ndarray:
    """Down-conversion contributions to dN_n/dt (no pump, no loss)"""
    populations = model._check(populations)
    flow = model.event_rates(populations)
    derivative = np.zeros(model.n_modes)
    np.add.at(derivative, model._n, flow)
    np.add.at(derivative, model._m, flow * model._distinct)
    np.add.at(derivative, model._l, -flow * model._parent_share)
    return derivative


def energy_weighted_sum(populations) -> np.ndarray:
    """Σ_n n·N_n along the last axis"""
    populations = np.asarray(populations, dtype=float)
    n = np.arange(1, populations.shape[-1] + 1)
    return populations @ n


def population_fluctuations(populations) -> np.ndarray:
    """Coherent-state photon-number fluctuations √N (error bars on N)"""
    return np.sqrt(np.clip(np.asarray(populations, dtype=float), 0.0, None))
