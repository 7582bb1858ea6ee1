"""
Units
=====
Physical constants and unit-suffix parsing for experiment files.

Every physical quantity in an experiment file is a string with an explicit
suffix ("254 pH", "3 GHz", "1.2 kHz"). How a frequency suffix is read depends
on the field kind:

- energy: "3 GHz" means h·3e9 J
- rate:   "1.2 kHz" means 2π·1.2e3 rad/s ("rad/s" and "1/s" taken as-is)
"""

import math
import re

from scipy import constants

from errors import ConfigError

E_CHARGE = constants.e
H_PLANCK = constants.h
HBAR = constants.hbar
FLUX_QUANTUM = constants.h / (2 * constants.e)
REDUCED_FLUX_QUANTUM = FLUX_QUANTUM / (2 * math.pi)

_PREFIX = {
    'T': 1e12, 'G': 1e9, 'M': 1e6, 'k': 1e3, '': 1.0,
    'm': 1e-3, 'u': 1e-6, 'μ': 1e-6, 'µ': 1e-6, 'n': 1e-9, 'p': 1e-12, 'f': 1e-15, 'a': 1e-18,
}

# kind -> {base unit: SI multiplier}
_BASE_UNITS = {
    'inductance': {'H': 1.0},
    'capacitance': {'F': 1.0},
    'current': {'A': 1.0},
    'resistance': {'Ohm': 1.0, 'ohm': 1.0, 'Ω': 1.0},
    'time': {'s': 1.0},
    'energy': {'J': 1.0, 'Hz': H_PLANCK, 'eV': constants.e},
    'rate': {'Hz': 2 * math.pi, 'rad/s': 1.0, '1/s': 1.0},
    'angle': {'rad': 1.0, 'deg': math.pi / 180.0, 'pi': math.pi},
}

_QUANTITY = re.compile(r'^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S.*?)\s*$')


def parse_quantity(value, kind: str, field: str = '') -> float:
    """Parse "<number> <unit>" into SI units for the given quantity kind

    Raises:
        ConfigError: bare numbers, unknown units, or a unit of the wrong kind
    """
    if kind not in _BASE_UNITS:
        raise ConfigError(f"{field}: unknown quantity kind '{kind}'", field=field)
    if isinstance(value, bool) or isinstance(value, (int, float)):
        example = next(iter(_BASE_UNITS[kind]))
        raise ConfigError(
            f"{field}: bare number {value!r} needs a unit suffix (e.g. '{value} {example}')",
            field=field,
        )
    if not isinstance(value, str):
        raise ConfigError(f"{field}: expected a quantity string, got {type(value).__name__}", field=field)

    match = _QUANTITY.match(value)
    if not match:
        raise ConfigError(f"{field}: cannot parse quantity '{value}'", field=field)
    number = float(match.group(1))
    unit = match.group(2)

    scale = _unit_scale(unit, kind)
    if scale is None:
        allowed = ', '.join(_BASE_UNITS[kind])
        raise ConfigError(f"{field}: unit '{unit}' is not a {kind} unit (base units: {allowed})", field=field)
    return number * scale


def _unit_scale(unit: str, kind: str):
    bases = _BASE_UNITS[kind]
    if unit in bases:
        return bases[unit]
    # Angles and slashed units take no prefixes
    for base, multiplier in bases.items():
        if kind == 'angle' or '/' in base:
            continue
        if unit.endswith(base):
            prefix = unit[:-len(base)]
            if prefix in _PREFIX:
                return _PREFIX[prefix] * multiplier
    return None


def to_table_units(value: float, kind: str) -> str:
    """Render an SI value back into the table convention (used in reports)"""
    if kind == 'energy':
        return f"{value / H_PLANCK / 1e9:.6g} GHz"
    if kind == 'rate':
        return f"{value / (2 * math.pi) / 1e6:.6g} MHz"
    if kind == 'inductance':
        return f"{value / 1e-12:.6g} pH"
    if kind == 'capacitance':
        return f"{value / 1e-15:.6g} fF"
    if kind == 'current':
        return f"{value / 1e-12:.6g} pA"
    return f"{value:.6g}"
