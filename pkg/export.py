"""
Export
======
CSV and JSON-lines writers for run outputs.

Output is deterministic: floats are written with repr (lossless), records
keep a fixed key order, and nothing time-dependent is recorded. Every
JSON-lines record starts with schema_version.
"""

import csv
import json
import logging
import math
import os

import numpy as np

from config import Config
from errors import ConfigError
from probe.components import FourierComponent
from states.trial import CorrelationSet

logger = logging.getLogger(__name__)


def format_float(value) -> str:
    return repr(float(value))


def _plain(value):
    """JSON-safe version of numpy scalars, complex numbers and NaN"""
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_plain(item) for item in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': _plain(value.real), 'im': _plain(value.imag)}
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_csv(path: str, header: list, rows) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(value) if not isinstance(value, str) else value for value in row])
    logger.debug(f"Wrote {path}")
    return path


def write_text(path: str, lines: list) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as handle:
        handle.write('\n'.join(lines) + '\n')
    logger.debug(f"Wrote {path}")
    return path


def write_jsonl(path: str, records: list) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w') as handle:
        for record in records:
            line = {'schema_version': Config.SCHEMA_VERSION}
            line.update(_plain(record))
            handle.write(json.dumps(line, allow_nan=False) + '\n')
    logger.debug(f"Wrote {path} ({len(records)} records)")
    return path


TABLE_FORMATS = ('csv', 'jsonl')


def write_table(stem: str, header: list, rows, fmt: str = 'csv') -> str:
    """Tabular output as `stem.csv` or `stem.jsonl` (one record per row)"""
    if fmt not in TABLE_FORMATS:
        raise ConfigError(f"unknown output format '{fmt}', expected one of {', '.join(TABLE_FORMATS)}")
    if fmt == 'csv':
        return write_csv(f"{stem}.csv", header, rows)
    records = [dict(zip(header, (float(value) for value in row))) for row in rows]
    return write_jsonl(f"{stem}.jsonl", records)


def read_jsonl(path: str) -> list:
    """Records of a JSON-lines file; schema_version must match"""
    if not os.path.exists(path):
        raise ConfigError(f"file not found: {path}", path=path)
    records = []
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path}:{number}: {e}", path=path) from e
            if record.get('schema_version') != Config.SCHEMA_VERSION:
                raise ConfigError(
                    f"{path}:{number}: schema_version {record.get('schema_version')!r}, "
                    f"expected {Config.SCHEMA_VERSION}", path=path,
                )
            records.append(record)
    return records


def read_csv(path: str):
    """(header, float rows) of a CSV written by write_csv"""
    with open(path, newline='') as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [[float(value) for value in row] for row in reader]
    return header, np.array(rows)


def _complex(entry) -> complex:
    if entry is None:
        return complex(math.nan, math.nan)
    return complex(entry['re'] if entry['re'] is not None else math.nan,
                   entry['im'] if entry['im'] is not None else math.nan)


# =============================================================================
# CORRELATORS
# =============================================================================

def correlation_records(corr: CorrelationSet) -> list:
    """Header record with the mode frequencies, then one record per Q, N, A entry"""
    records = [{'record': 'modes', 'label': corr.label, 'omega': corr.omega}]
    for n in range(corr.n_modes):
        records.append({'record': 'Q', 'n': n + 1, 'm': None,
                        'frequency': corr.Q_freq[n], 'value': complex(corr.Q[n])})
    for channel, freqs in (('N', corr.N_freq), ('A', corr.A_freq)):
        matrix = getattr(corr, channel)
        for n in range(corr.n_modes):
            for m in range(corr.n_modes):
                records.append({'record': channel, 'n': n + 1, 'm': m + 1,
                                'frequency': freqs[n, m], 'value': complex(matrix[n, m])})
    return records


def squeezing_records(measure, truth=None) -> list:
    """One record per S_nm entry (n <= m) and channel, with the error against truth if given

    relative_error is |S − S_true| over the largest |S_true| entry.
    """
    scale = truth.max_abs() if truth is not None else None
    records = []
    for channel in ('difference', 'sum'):
        matrix = getattr(measure, channel)
        reference = getattr(truth, channel) if truth is not None else None
        for n in range(matrix.shape[0]):
            for m in range(n, matrix.shape[1]):
                value = complex(matrix[n, m])
                error = None
                if reference is not None:
                    error = abs(value - reference[n, m]) / (scale if scale > 0 else 1.0)
                records.append({'record': 'S', 'channel': channel, 'n': n + 1, 'm': m + 1,
                                're': value.real, 'im': value.imag, 'relative_error': error})
    return records


def correlations_from_records(records: list) -> CorrelationSet:
    header = next((record for record in records if record['record'] == 'modes'), None)
    if header is None:
        raise ConfigError("correlator file has no modes record")
    omega = np.array([math.nan if w is None else w for w in header['omega']], dtype=float)
    n_modes = len(omega)
    Q = np.zeros(n_modes, dtype=complex)
    N = np.zeros((n_modes, n_modes), dtype=complex)
    A = np.zeros((n_modes, n_modes), dtype=complex)
    for record in records:
        kind = record['record']
        if kind == 'Q':
            Q[record['n'] - 1] = _complex(record['value'])
        elif kind in ('N', 'A'):
            target = N if kind == 'N' else A
            target[record['n'] - 1, record['m'] - 1] = _complex(record['value'])
    return CorrelationSet(omega=omega, Q=Q, N=N, A=A, label=header.get('label', ''))


# =============================================================================
# MEASUREMENTS
# =============================================================================

def measurement_records(measurements: list, measured: list) -> list:
    records = []
    for index, (measurement, components) in enumerate(zip(measurements, measured)):
        record = {'record': 'measurement', 'index': index}
        record.update(measurement.as_dict())
        record['components'] = [
            {'frequency': component.frequency, 'value': complex(component.amplitude), 'label': component.label}
            for component in components
        ]
        records.append(record)
    return records


def measured_from_records(records: list) -> list:
    """(measurement dicts, component lists) in file order"""
    settings, measured = [], []
    for record in sorted((r for r in records if r.get('record') == 'measurement'), key=lambda r: r['index']):
        settings.append({'site_i': record['site_i'], 'site_j': record['site_j'], 'phi_ext': record['phi_ext']})
        measured.append([
            FourierComponent(entry['frequency'], _complex(entry['value']), entry.get('label', ''))
            for entry in record['components']
        ])
    return settings, measured
