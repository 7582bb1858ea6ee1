"""
Trial Wavefunctions and Their Correlators
=========================================
Closed-form quadratures and normal/anomalous correlators for three trial
states of the ladder modes:

- coherent product  Ψ_C = ∏ D_n(α_n)|0⟩
- Fock product      Ψ_N = ∏ |N_m⟩
- squeezed          Ψ_S = ∏ D_l(α_l) ∏ S_nm(ξ_nm)|0⟩, each mode in at most one pair

Every correlator is a single-frequency real signal value(t) = Re(amp·e^{−iωt}),
where amp is the t = 0 expectation: Q_n ↔ ⟨a_n⟩, N_nm ↔ ⟨a_n† a_m⟩ at ω_m − ω_n,
A_nm ↔ ⟨a_n a_m⟩ at ω_n + ω_m. This is the ½-normalized convention
Q_n = ½⟨a_n + a_n†⟩, under which N + A − 2QQ vanishes for Ψ_C.

Two-mode squeezers are exp(ξ* a_n a_m − ξ a_n† a_m†); a self pair uses
exp(½(ξ* a² − ξ a†²)) so both kinds give sinh²|ξ| and −½e^{i arg ξ}sinh 2|ξ|.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from circuit.coupling import CouplingTensor
from circuit.ladder import ModeBasis
from errors import ConfigError
from units import HBAR

logger = logging.getLogger(__name__)


class StateKind(str, Enum):
    COHERENT = 'coherent'
    FOCK = 'fock'
    SQUEEZED = 'squeezed'


@dataclass(frozen=True, eq=False)
class TrialState:
    """One trial wavefunction over modes 1..n_modes"""
    kind: StateKind
    alphas: np.ndarray = None
    occupations: np.ndarray = None
    pairing: tuple = ()
    xi: dict = field(default_factory=dict)
    T_star: float = None
    drive_mode: int = None

    def __post_init__(self):
        kind = StateKind(self.kind)
        object.__setattr__(self, 'kind', kind)

        if kind in (StateKind.COHERENT, StateKind.SQUEEZED):
            if self.alphas is None:
                raise ConfigError(f"{kind.value} state needs alphas")
            object.__setattr__(self, 'alphas', np.asarray(self.alphas, dtype=complex))
        if kind == StateKind.FOCK:
            if self.occupations is None:
                raise ConfigError("fock state needs occupations")
            occupations = np.asarray(self.occupations)
            if np.any(occupations < 0) or np.any(occupations != np.rint(occupations)):
                raise ConfigError("fock occupations must be non-negative integers")
            object.__setattr__(self, 'occupations', occupations.astype(int))
        if kind == StateKind.SQUEEZED:
            self._check_pairing()

    def _check_pairing(self):
        pairs = tuple(tuple(sorted(pair)) for pair in self.pairing)
        object.__setattr__(self, 'pairing', pairs)
        seen = set()
        for n, m in pairs:
            for mode in {n, m}:
                if mode in seen:
                    raise ConfigError(f"mode {mode} appears in more than one squeezing pair")
                seen.add(mode)
            if self.drive_mode is not None and n + m != self.drive_mode:
                raise ConfigError(f"pair ({n}, {m}) does not sum to the drive mode {self.drive_mode}")
        xi = {tuple(sorted(key)): complex(value) for key, value in self.xi.items()}
        missing = [pair for pair in pairs if pair not in xi]
        if missing:
            raise ConfigError(f"no squeezing parameter for pairs {missing}")
        object.__setattr__(self, 'xi', xi)

    @property
    def n_modes(self) -> int:
        if self.kind == StateKind.FOCK:
            return len(self.occupations)
        return len(self.alphas)

    @classmethod
    def coherent(cls, alphas) -> 'TrialState':
        return cls(kind=StateKind.COHERENT, alphas=alphas)

    @classmethod
    def fock(cls, occupations) -> 'TrialState':
        return cls(kind=StateKind.FOCK, occupations=occupations)

    @classmethod
    def squeezed(cls, alphas, xi: dict, drive_mode: int = None, T_star: float = None) -> 'TrialState':
        return cls(kind=StateKind.SQUEEZED, alphas=alphas, pairing=tuple(xi), xi=xi,
                   drive_mode=drive_mode, T_star=T_star)


@dataclass(frozen=True, eq=False)
class CorrelationSet:
    """Single-frequency complex amplitudes of Q_n, N_nm and A_nm"""
    omega: np.ndarray
    Q: np.ndarray
    N: np.ndarray
    A: np.ndarray
    label: str = ''

    @property
    def n_modes(self) -> int:
        return len(self.omega)

    @property
    def Q_freq(self) -> np.ndarray:
        return np.asarray(self.omega)

    @property
    def N_freq(self) -> np.ndarray:
        return self.omega[None, :] - self.omega[:, None]

    @property
    def A_freq(self) -> np.ndarray:
        return self.omega[:, None] + self.omega[None, :]

    def evaluate(self, t: float):
        """Real values (Q(t), N(t), A(t))"""
        Q = np.real(self.Q * np.exp(-1j * self.Q_freq * t))
        N = np.real(self.N * np.exp(-1j * self.N_freq * t))
        A = np.real(self.A * np.exp(-1j * self.A_freq * t))
        return Q, N, A

    def relabel(self, label: str) -> 'CorrelationSet':
        return CorrelationSet(omega=self.omega, Q=self.Q, N=self.N, A=self.A, label=label)


@dataclass(frozen=True, eq=False)
class SqueezingMeasure:
    """S = N + A − 2QQ split into its difference- and sum-frequency parts"""
    omega: np.ndarray
    difference: np.ndarray
    sum: np.ndarray

    def evaluate(self, t: float) -> np.ndarray:
        diff_freq = self.omega[None, :] - self.omega[:, None]
        sum_freq = self.omega[:, None] + self.omega[None, :]
        return (np.real(self.difference * np.exp(-1j * diff_freq * t))
                + np.real(self.sum * np.exp(-1j * sum_freq * t)))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.difference)), np.max(np.abs(self.sum))))

    def support(self, channel: str, tol: float) -> set:
        """1-based (n, m) entries of a channel ('difference' or 'sum') above tol"""
        matrix = self.difference if channel == 'difference' else self.sum
        rows, cols = np.nonzero(np.abs(matrix) > tol)
        return {(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)}


def _check_state(state: TrialState, basis: ModeBasis):
    if state.n_modes != basis.n_modes:
        raise ConfigError(f"state has {state.n_modes} modes, basis has {basis.n_modes}")
    for pair in state.pairing:
        for mode in pair:
            if not 1 <= mode <= basis.n_modes:
                raise ConfigError(f"pairing references mode {mode} outside 1..{basis.n_modes}")


def correlations(state: TrialState, basis: ModeBasis) -> CorrelationSet:
    """Closed-form Q, N, A amplitudes for a trial state"""
    _check_state(state, basis)
    n_modes = basis.n_modes

    if state.kind == StateKind.FOCK:
        Q = np.zeros(n_modes, dtype=complex)
        N = np.diag(state.occupations.astype(complex))
        A = np.zeros((n_modes, n_modes), dtype=complex)
        return CorrelationSet(omega=basis.omega, Q=Q, N=N, A=A, label=state.kind.value)

    alpha = state.alphas
    Q = alpha.copy()
    N = np.conj(alpha)[:, None] * alpha[None, :]
    A = alpha[:, None] * alpha[None, :]

    if state.kind == StateKind.SQUEEZED:
        for (n, m), xi in state.xi.items():
            r, theta = abs(xi), np.angle(xi)
            i, j = n - 1, m - 1
            anomalous = -0.5 * np.exp(1j * theta) * np.sinh(2 * r)
            N[i, i] += np.sinh(r) ** 2
            A[i, j] += anomalous
            if i != j:
                N[j, j] += np.sinh(r) ** 2
                A[j, i] += anomalous

    return CorrelationSet(omega=basis.omega, Q=Q, N=N, A=A, label=state.kind.value)


def squeezing_measure(corr: CorrelationSet) -> SqueezingMeasure:
    """S_nm = N_nm + A_nm − 2Q_nQ_m as single-frequency parts; zero iff clustering holds"""
    Q = corr.Q
    return SqueezingMeasure(
        omega=corr.omega,
        difference=corr.N - np.conj(Q)[:, None] * Q[None, :],
        sum=corr.A - Q[:, None] * Q[None, :],
    )


def alphas_from_populations(steady, phases) -> np.ndarray:
    """Coherent amplitudes with |α_n|² = N*_n and arg α_n = phases_n"""
    steady = np.asarray(steady, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if steady.shape != phases.shape:
        raise ConfigError(f"{len(steady)} populations but {len(phases)} phases")
    if np.any(steady < 0):
        raise ConfigError(f"negative population {steady.min():.3e}")
    return np.sqrt(steady) * np.exp(1j * phases)


def random_phases(n: int, seed: int) -> np.ndarray:
    """Uniform phases in [0, 2π) from a seeded generator"""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2 * np.pi, n)


def squeezing_pairs(drive_mode: int, n_modes: int) -> list:
    """Pairs {n, drive − n} inside 1..n_modes, self pair included"""
    return [(n, drive_mode - n) for n in range(1, drive_mode // 2 + 1)
            if drive_mode - n <= n_modes]


def derive_xi(alpha_drive: complex, g: float, tensor: CouplingTensor, pairs: list,
              drive_mode: int, T_star: float) -> dict:
    """ξ_nm = i·α_drive·g·A_{nm,drive}·T*/ħ at t = 0"""
    if T_star is None or T_star <= 0:
        raise ConfigError("T_star must be positive to derive squeezing parameters")
    return {
        (n, m): 1j * alpha_drive * g * tensor.value(n, m, drive_mode) * T_star / HBAR
        for n, m in pairs
    }


def correlation_differences(first: CorrelationSet, second: CorrelationSet, tol: float = 1e-12) -> list:
    """(channel, n, m) entries where two sets differ by more than tol·scale"""
    scale = max(np.max(np.abs(first.N)), np.max(np.abs(first.A)), 1e-300)
    differences = []
    for channel in ('Q', 'N', 'A'):
        delta = np.abs(getattr(first, channel) - getattr(second, channel))
        if channel == 'Q':
            differences += [('Q', int(i) + 1, None) for i in np.nonzero(delta > tol * scale)[0]]
            continue
        rows, cols = np.nonzero(delta > tol * scale)
        differences += [(channel, int(i) + 1, int(j) + 1) for i, j in zip(rows, cols)]
    return differences
