"""
Fock-Space Oracle
=================
Brute-force check of the closed-form correlators: builds the trial state in
a truncated Fock space over a few active modes and takes expectation values
directly.
"""

import logging
from functools import reduce

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import expm_multiply

from circuit.ladder import ModeBasis
from config import Config
from errors import ConfigError, TruncationOverflowError
from states.trial import CorrelationSet, StateKind, TrialState

logger = logging.getLogger(__name__)


def _annihilation(dim: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, format='csr', dtype=complex)


def _embedded(op, position: int, n_active: int, dim: int):
    factors = [sparse.identity(dim, format='csr', dtype=complex)] * n_active
    factors[position] = op
    return reduce(lambda left, right: sparse.kron(left, right, format='csr'), factors)


def _active_modes(state: TrialState, modes) -> list:
    if modes is not None:
        return sorted(int(mode) for mode in modes)
    if state.kind == StateKind.FOCK:
        return [int(i) + 1 for i in np.nonzero(state.occupations)[0]]
    active = {int(i) + 1 for i in np.nonzero(np.abs(state.alphas) > 0)[0]}
    for pair in state.pairing:
        active.update(pair)
    return sorted(active)


def _check_inactive(state: TrialState, active: list):
    for index in range(state.n_modes):
        if index + 1 in active:
            continue
        occupied = (state.occupations[index] != 0 if state.kind == StateKind.FOCK
                    else abs(state.alphas[index]) > 0)
        if occupied:
            raise ConfigError(f"mode {index + 1} is occupied but not among the oracle's active modes")
    for pair in state.pairing:
        if not set(pair) <= set(active):
            raise ConfigError(f"squeezing pair {pair} is not among the oracle's active modes")


def _check_truncation(state: TrialState, truncation: int):
    if state.kind == StateKind.FOCK:
        needed = int(state.occupations.max()) + 2
    else:
        largest = float(np.max(np.abs(state.alphas) ** 2)) if len(state.alphas) else 0.0
        for xi in state.xi.values():
            largest = max(largest, float(np.sinh(abs(xi)) ** 2))
        needed = int(np.ceil(4 * largest))
    if truncation < needed:
        raise ConfigError(f"truncation {truncation} too small for this state (needs at least {needed})")


def fock_space_oracle(state: TrialState, basis: ModeBasis, truncation: int = None,
                      modes=None) -> CorrelationSet:
    """Correlators of a trial state by exact construction in a truncated Fock space

    Args:
        state: trial state over basis.n_modes modes
        basis: mode basis (frequencies only)
        truncation: Fock levels per active mode
        modes: active modes (default: every occupied or squeezed mode)

    Raises:
        ConfigError: too many active modes, or truncation below 4·max(|α|², sinh²|ξ|)
        TruncationOverflowError: more than Config.ORACLE_OVERFLOW of the weight in the top level
    """
    truncation = Config.ORACLE_TRUNCATION if truncation is None else int(truncation)
    if state.n_modes != basis.n_modes:
        raise ConfigError(f"state has {state.n_modes} modes, basis has {basis.n_modes}")
    active = _active_modes(state, modes)
    if len(active) > Config.ORACLE_MAX_MODES:
        raise ConfigError(f"oracle supports at most {Config.ORACLE_MAX_MODES} active modes, got {len(active)}")
    _check_inactive(state, active)
    _check_truncation(state, truncation)

    n_active = max(len(active), 1)
    position = {mode: k for k, mode in enumerate(active)}
    a = _annihilation(truncation)
    ops = [_embedded(a, k, n_active, truncation) for k in range(n_active)]
    dim = truncation ** n_active

    psi = np.zeros(dim, dtype=complex)
    if state.kind == StateKind.FOCK:
        levels = [int(state.occupations[mode - 1]) for mode in active] or [0]
        psi[np.ravel_multi_index(levels, (truncation,) * n_active)] = 1.0
    else:
        psi[0] = 1.0
        for (n, m), xi in state.xi.items():
            an, am = ops[position[n]], ops[position[m]]
            if n == m:
                generator = 0.5 * (np.conj(xi) * (an @ an) - xi * (an.conj().T @ an.conj().T))
            else:
                generator = np.conj(xi) * (an @ am) - xi * (an.conj().T @ am.conj().T)
            psi = expm_multiply(generator.tocsc(), psi)
        for mode in active:
            alpha = state.alphas[mode - 1]
            if alpha == 0:
                continue
            op = ops[position[mode]]
            psi = expm_multiply((alpha * op.conj().T - np.conj(alpha) * op).tocsc(), psi)

    weights = (np.abs(psi) ** 2).reshape((truncation,) * n_active)
    for k, mode in enumerate(active):
        top = float(np.take(weights, truncation - 1, axis=k).sum())
        if top > Config.ORACLE_OVERFLOW:
            raise TruncationOverflowError(
                f"mode {mode} has weight {top:.3e} in Fock level {truncation - 1}; raise the truncation"
            )

    n_modes = basis.n_modes
    Q = np.zeros(n_modes, dtype=complex)
    N = np.zeros((n_modes, n_modes), dtype=complex)
    A = np.zeros((n_modes, n_modes), dtype=complex)
    for n in active:
        an = ops[position[n]]
        Q[n - 1] = np.vdot(psi, an @ psi)
        for m in active:
            am = ops[position[m]]
            N[n - 1, m - 1] = np.vdot(psi, an.conj().T @ (am @ psi))
            A[n - 1, m - 1] = np.vdot(psi, an @ (am @ psi))

    logger.debug(f"Oracle: {len(active)} active modes, dimension {dim}")
    return CorrelationSet(omega=basis.omega, Q=Q, N=N, A=A, label=f"{state.kind.value}-oracle")
