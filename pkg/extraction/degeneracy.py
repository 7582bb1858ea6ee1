"""
Degeneracy Groups
=================
Correlator unknowns sharing one readout frequency.

Unknowns are N(n, m) at ω_m − ω_n and A(n, m) at ω_n + ω_m, n <= m. Sorted
by frequency, neighbours closer than the binning tolerance are chained into
one group, so groups may mix both channels. Every N(n, n) lands in the DC
group.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from circuit.ladder import ModeBasis
from config import Config
from errors import ConfigError

logger = logging.getLogger(__name__)

CHANNELS = ('N', 'A')


@dataclass(frozen=True, order=True)
class Unknown:
    """Correlator label, canonicalized so n <= m"""
    channel: str
    n: int
    m: int

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ConfigError(f"unknown channel '{self.channel}'")
        if self.n > self.m:
            first, second = self.m, self.n
            object.__setattr__(self, 'n', first)
            object.__setattr__(self, 'm', second)

    def frequency(self, omega) -> float:
        if self.channel == 'A':
            return float(omega[self.n - 1] + omega[self.m - 1])
        return float(omega[self.m - 1] - omega[self.n - 1])

    @property
    def weight(self) -> float:
        """Multiplicity of the term in the symmetric double sum"""
        return 1.0 if self.n == self.m else 2.0

    def __str__(self):
        return f"{self.channel}({self.n},{self.m})"

    @classmethod
    def parse(cls, text: str) -> 'Unknown':
        channel, rest = text[0], text[2:-1]
        n, m = (int(part) for part in rest.split(','))
        return cls(channel, n, m)


@dataclass(frozen=True)
class DegeneracyGroup:
    frequency: float
    members: tuple
    member_frequencies: tuple = ()

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_dc(self) -> bool:
        return self.frequency == 0.0

    def by_channel(self, channel: str) -> tuple:
        return tuple(member for member in self.members if member.channel == channel)

    @property
    def labels(self) -> list:
        return [str(member) for member in self.members]


@dataclass(frozen=True)
class DegeneracyTable:
    groups: tuple
    tolerance: float
    modes: tuple

    def max_size(self, channel: Optional[str] = None) -> int:
        sizes = [len(group.by_channel(channel)) if channel else group.size for group in self.groups]
        return max(sizes, default=0)

    def as_mapping(self) -> dict:
        return {group.frequency: group.labels for group in self.groups}

    def group_of(self, unknown: Unknown) -> DegeneracyGroup:
        for group in self.groups:
            if unknown in group.members:
                return group
        raise KeyError(str(unknown))

    def channel_groups(self, channel: str) -> list:
        """Single-channel view: members of one channel, grouped as in the mixed table"""
        view = []
        for group in self.groups:
            members = group.by_channel(channel)
            if members:
                freqs = tuple(f for member, f in zip(group.members, group.member_frequencies)
                              if member.channel == channel)
                view.append(DegeneracyGroup(frequency=group.frequency, members=members, member_frequencies=freqs))
        return view

    def nearest_group(self, frequency: float) -> Optional[DegeneracyGroup]:
        """Group with a member frequency within tolerance of the given one"""
        best, best_gap = None, None
        for group in self.groups:
            for member_freq in group.member_frequencies or (group.frequency,):
                gap = abs(member_freq - frequency)
                if best_gap is None or gap < best_gap:
                    best, best_gap = group, gap
        if best_gap is not None and best_gap <= max(self.tolerance, 1e-12 * abs(frequency)):
            return best
        return None

    @property
    def unknowns(self) -> list:
        return [member for group in self.groups for member in group.members]


def degeneracy_groups(basis: ModeBasis, n_modes: int = None, modes=None,
                      tolerance: float = None) -> DegeneracyTable:
    """Group every N(n, m) and A(n, m), n <= m, by readout frequency

    Args:
        basis: mode basis supplying ω_n
        n_modes: use modes 1..n_modes (default all retained modes)
        modes: explicit subset of modes (overrides n_modes)
        tolerance: chaining width in rad/s (default ω0/100)
    """
    if modes is None:
        n_modes = basis.n_modes if n_modes is None else n_modes
        if not 1 <= n_modes <= basis.n_modes:
            raise ConfigError(f"n_modes={n_modes} outside 1..{basis.n_modes}")
        modes = range(1, n_modes + 1)
    modes = tuple(sorted({int(mode) for mode in modes}))
    if modes and not (1 <= modes[0] and modes[-1] <= basis.n_modes):
        raise ConfigError(f"modes {modes} outside 1..{basis.n_modes}")
    tolerance = Config.degeneracy_tolerance(basis.omega0) if tolerance is None else tolerance

    unknowns = [Unknown(channel, n, m) for channel in CHANNELS
                for i, n in enumerate(modes) for m in modes[i:]]
    ordered = sorted(unknowns, key=lambda u: (u.frequency(basis.omega), u))

    groups = []
    current, current_freqs = [], []
    for unknown in ordered:
        frequency = unknown.frequency(basis.omega)
        if current and frequency - current_freqs[-1] > tolerance:
            groups.append(_close(current, current_freqs))
            current, current_freqs = [], []
        current.append(unknown)
        current_freqs.append(frequency)
    if current:
        groups.append(_close(current, current_freqs))

    table = DegeneracyTable(groups=tuple(groups), tolerance=tolerance, modes=modes)
    logger.debug(f"Degeneracy table: {len(unknowns)} unknowns in {len(groups)} groups, "
                 f"largest {table.max_size()}")
    return table


def _close(members: list, frequencies: list) -> DegeneracyGroup:
    pairs = sorted(zip(members, frequencies))
    return DegeneracyGroup(
        frequency=float(np.mean(frequencies)),
        members=tuple(member for member, _ in pairs),
        member_frequencies=tuple(freq for _, freq in pairs),
    )
