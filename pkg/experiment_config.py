"""
Experiment Configuration
========================
Loads experiment files (TOML) into typed configs.

Files are merged in order: shipped presets first, then the user's --config
overlay (tables merged key by key). Every physical quantity needs a unit
suffix; bare numbers are accepted only for counts, indices and dimensionless
options.

Sections:
- [ladder]     LadderConfig fields
- [probe]      ProbeConfig fields
- [state]      trial-state options (kind, T_star, seed, snr_db, populations)
- [run]        durations, sampling, probe sites, test-signal shape
- [reference]  tabulated values quoted for comparison in reports
"""

import copy
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import MISSING, dataclass, field, fields
from typing import Optional

from circuit.ladder import LadderConfig
from config import Config
from errors import ConfigError
from probe.coupler import ProbeConfig
from units import parse_quantity

logger = logging.getLogger(__name__)

# field -> quantity kind; 'int', 'float', 'str', 'bool' and 'list' take bare values
LADDER_FIELDS = {
    'N': 'int', 'L': 'inductance', 'C': 'capacitance', 'EJ_imp': 'energy',
    'i0': 'int', 'j0': 'int', 'phi_imp': 'angle', 'kappa': 'rate',
    'drive_mode': 'int', 'Omega0': 'rate', 'n_modes': 'int', 'fn_denominator': 'str',
    'g': 'energy', 'Gamma': 'rate', 'omega0_table': 'rate',
}

PROBE_FIELDS = {
    'C_S': 'capacitance', 'L_S': 'inductance', 'C_X': 'capacitance', 'L_X': 'inductance',
    'EJ_P': 'energy', 'I_c': 'current', 'M': 'inductance', 'L_P': 'inductance',
    'C_P': 'capacitance', 'E_M': 'energy', 'phi_ext': 'angle', 'kappa_probe': 'rate',
    'damping': 'str', 'beta_mode': 'str',
}

STATE_FIELDS = {
    'kind': 'str', 'T_star': 'time', 'seed': 'int', 'snr_db': 'float', 'populations': 'list',
}

RUN_FIELDS = {
    't_end': 'time', 'samples': 'int', 'window': 'str', 'probe_input': 'str',
    'site_i': 'int', 'site_j': 'int', 'harmonic_i': 'int', 'harmonic_j': 'int',
    'amplitude_i': 'angle', 'amplitude_j': 'angle', 'samples_per_period': 'int',
    'periods': 'int', 'n_peaks': 'int', 'n_modes': 'int',
}

REFERENCE_FIELDS = {
    'Z_P': 'resistance', 'omega_P': 'rate', 'beta': 'float', 'I_P_critical': 'current',
}

SECTIONS = {
    'ladder': LADDER_FIELDS,
    'probe': PROBE_FIELDS,
    'state': STATE_FIELDS,
    'run': RUN_FIELDS,
    'reference': REFERENCE_FIELDS,
}


@dataclass(frozen=True)
class StateSpec:
    kind: str = 'squeezed'
    T_star: Optional[float] = None
    seed: Optional[int] = None
    snr_db: Optional[float] = None
    populations: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ('coherent', 'fock', 'squeezed'):
            raise ConfigError(f"state.kind must be coherent, fock or squeezed, got '{self.kind}'",
                              field='state.kind')


@dataclass(frozen=True)
class RunSpec:
    t_end: Optional[float] = None
    samples: int = Config.TRAJECTORY_SAMPLES
    window: str = 'hann'
    probe_input: str = 'two_tone'
    site_i: int = 4
    site_j: Optional[int] = 5
    harmonic_i: int = 4
    harmonic_j: int = 3
    amplitude_i: float = 0.6
    amplitude_j: float = 0.6
    samples_per_period: int = 512
    periods: int = 16
    n_peaks: int = 10
    n_modes: Optional[int] = None

    def __post_init__(self):
        if self.probe_input not in ('two_tone', 'state'):
            raise ConfigError(f"run.probe_input must be two_tone or state, got '{self.probe_input}'",
                              field='run.probe_input')


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed experiment: ladder, probe, trial state and run options"""
    ladder: LadderConfig
    probe: Optional[ProbeConfig] = None
    state: StateSpec = field(default_factory=StateSpec)
    run: RunSpec = field(default_factory=RunSpec)
    reference: dict = field(default_factory=dict)
    sources: tuple = ()


# =============================================================================
# LOADING
# =============================================================================

def read_toml(path: str) -> dict:
    """Parse one TOML file; syntax errors carry the file, line and column"""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}", path=path)
    with open(path, 'rb') as handle:
        try:
            return tomllib.load(handle)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}", path=path) from e


def merge(base: dict, overlay: dict) -> dict:
    """Deep merge; overlay wins, tables merge key by key"""
    merged = copy.deepcopy(base)
    for key, value in overlay.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _convert(section: str, name: str, kind: str, value):
    dotted = f"{section}.{name}"
    if kind == 'int':
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{dotted}: expected an integer, got {value!r}", field=dotted)
        return value
    if kind == 'float':
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{dotted}: expected a number, got {value!r}", field=dotted)
        return float(value)
    if kind == 'str':
        if not isinstance(value, str):
            raise ConfigError(f"{dotted}: expected a string, got {value!r}", field=dotted)
        return value
    if kind == 'list':
        if not isinstance(value, list) or not all(isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"{dotted}: expected a list of numbers", field=dotted)
        return tuple(float(v) for v in value)
    return parse_quantity(value, kind, dotted)


def _section(raw: dict, section: str) -> dict:
    spec = SECTIONS[section]
    values = raw.get(section, {})
    if not isinstance(values, dict):
        raise ConfigError(f"[{section}] must be a table", field=section)
    converted = {}
    for name, value in values.items():
        if name not in spec:
            raise ConfigError(f"{section}.{name}: unknown field", field=f"{section}.{name}")
        converted[name] = _convert(section, name, spec[name], value)
    return converted


def _required(section: str, values: dict, cls) -> dict:
    needed = [f.name for f in fields(cls) if f.default is MISSING and f.default_factory is MISSING]
    missing = [name for name in needed if name not in values]
    if missing:
        raise ConfigError(f"[{section}] is missing {', '.join(missing)}", field=section)
    return values


def from_dict(raw: dict, sources: tuple = ()) -> ExperimentConfig:
    """Typed ExperimentConfig from merged raw TOML data"""
    unknown = [key for key in raw if key not in SECTIONS and key != 'schema_version']
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(unknown)}", field=unknown[0])
    if 'ladder' not in raw:
        raise ConfigError("experiment has no [ladder] section", field='ladder')

    ladder_values = _section(raw, 'ladder')
    ladder_values.setdefault('fn_denominator', Config.FN_DENOMINATOR)
    ladder = LadderConfig(**_required('ladder', ladder_values, LadderConfig))

    probe = None
    if 'probe' in raw:
        probe = ProbeConfig(**_required('probe', _section(raw, 'probe'), ProbeConfig))

    state = StateSpec(**_section(raw, 'state'))
    run = RunSpec(**_section(raw, 'run'))
    reference = _section(raw, 'reference')
    return ExperimentConfig(ladder=ladder, probe=probe, state=state, run=run,
                            reference=reference, sources=tuple(sources))


def load_experiment(presets: list = None, config_path: str = None) -> ExperimentConfig:
    """Merge presets and an optional overlay file into an ExperimentConfig

    Args:
        presets: preset names or paths (default Config.DEFAULT_PRESETS)
        config_path: user overlay file applied last
    """
    presets = Config.DEFAULT_PRESETS if presets is None else presets
    raw, sources = {}, []
    for preset in presets:
        path = preset if os.path.exists(preset) else Config.preset_path(preset)
        raw = merge(raw, read_toml(path))
        sources.append(path)
    if config_path:
        raw = merge(raw, read_toml(config_path))
        sources.append(config_path)

    version = raw.get('schema_version', Config.SCHEMA_VERSION)
    if str(version) != Config.SCHEMA_VERSION:
        logger.warning(f"Experiment schema_version {version} differs from {Config.SCHEMA_VERSION}")

    config = from_dict(raw, tuple(sources))
    logger.info(f"Loaded experiment from {len(sources)} file(s): {', '.join(os.path.basename(s) for s in sources)}")
    return config