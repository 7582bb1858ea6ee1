"""
Impurity Coupling Tensor
========================
Three-wave-mixing couplings A_nml produced by a flux-biased junction between
ladder nodes i0 and j0 at φ_imp = π/2, after the rotating-wave approximation
(only n + m = l survives).

Only n <= m is stored; `value(n, m, l)` is the symmetrized accessor.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from circuit.ladder import LadderConfig, ModeBasis
from errors import ConfigError

logger = logging.getLogger(__name__)

# (√(2/π))³ · 2³ · 2^{3/4}
A_PREFACTOR = (math.sqrt(2 / math.pi)) ** 3 * 8 * 2 ** 0.75

CUBIC_FLUX = math.pi / 2


@dataclass(frozen=True)
class CouplingTensor:
    """Sparse map (n, m, l) -> A_nml with n <= m and n + m = l"""
    entries: dict
    g: float
    n_modes: int

    def value(self, n: int, m: int, l: int) -> float:
        if n > m:
            n, m = m, n
        return self.entries.get((n, m, l), 0.0)

    def __len__(self):
        return len(self.entries)

    def triples(self):
        """Arrays (n, m, l, A) over stored entries, sorted by (l, n)"""
        keys = sorted(self.entries, key=lambda key: (key[2], key[0]))
        if not keys:
            empty = np.zeros(0, dtype=int)
            return empty, empty, empty, np.zeros(0)
        n, m, l = (np.array(column, dtype=int) for column in zip(*keys))
        values = np.array([self.entries[key] for key in keys])
        return n, m, l, values

    def restricted_to(self, keep: set) -> 'CouplingTensor':
        """Copy holding only the listed (n, m, l) triples"""
        entries = {key: value for key, value in self.entries.items() if key in keep}
        return CouplingTensor(entries=entries, g=self.g, n_modes=self.n_modes)


def coupling_profile(N: int, i0: int, j0: int, n_modes: int, denominator: str = 'derived') -> np.ndarray:
    """f_n = (1/√n)·sin(nπ(i0−j0)/D)·cos(nπ(i0+j0)/D) for n = 1..n_modes

    D = 2(N+1) ("derived", consistent with the mode shapes) or 2N+1 ("odd", alias "paper").
    """
    if denominator == 'derived':
        D = 2 * (N + 1)
    elif denominator in ('odd', 'paper'):
        D = 2 * N + 1
    else:
        raise ConfigError(f"unknown fn_denominator '{denominator}'")
    n = np.arange(1, n_modes + 1, dtype=float)
    return np.sin(n * math.pi * (i0 - j0) / D) * np.cos(n * math.pi * (i0 + j0) / D) / np.sqrt(n)


def build_coupling_tensor(config: LadderConfig, basis: ModeBasis) -> CouplingTensor:
    """A_nml = (√(2/π))³·2³·2^{3/4}·f_n f_m f_l for every n + m = l <= n_modes"""
    if not math.isclose(config.phi_imp, CUBIC_FLUX, rel_tol=0, abs_tol=1e-12):
        raise ConfigError(
            f"phi_imp={config.phi_imp:.6g} rad: only the cubic regime φ_imp = π/2 is supported",
            field='ladder.phi_imp',
        )

    n_modes = basis.n_modes
    f = coupling_profile(config.N, config.i0, config.j0, n_modes, config.fn_denominator)

    entries = {}
    for l in range(2, n_modes + 1):
        for n in range(1, l // 2 + 1):
            m = l - n
            value = A_PREFACTOR * f[n - 1] * f[m - 1] * f[l - 1]
            if value != 0.0:
                entries[(n, m, l)] = float(value)

    tensor = CouplingTensor(entries=entries, g=config.g_effective, n_modes=n_modes)
    logger.debug(f"Coupling tensor: {len(tensor)} triples, g={tensor.g:.4e} J")
    return tensor
