import json
import math

import numpy as np
import pytest

from config import Config
from errors import ConfigError
from export import (
    correlation_records,
    correlations_from_records,
    measured_from_records,
    measurement_records,
    read_csv,
    read_jsonl,
    write_csv,
    write_jsonl,
    write_table,
)
from extraction import Measurement
from probe import FourierComponent
from states import TrialState, correlations


def test_jsonl_records_carry_schema_version(tmp_path):
    path = write_jsonl(str(tmp_path / "out" / "records.jsonl"),
                       [{'record': 'x', 'value': np.float64(1.5), 'z': 1 + 2j, 'missing': math.nan}])
    line = json.loads((tmp_path / "out" / "records.jsonl").read_text().splitlines()[0])
    assert list(line)[0] == 'schema_version'
    assert line['schema_version'] == Config.SCHEMA_VERSION
    assert line['z'] == {'re': 1.0, 'im': 2.0}
    assert line['missing'] is None
    assert read_jsonl(path)[0]['value'] == 1.5


def test_schema_mismatch_rejected(tmp_path):
    path = tmp_path / "old.jsonl"
    path.write_text('{"schema_version": "0.1", "record": "x"}\n')
    with pytest.raises(ConfigError, match="schema_version"):
        read_jsonl(str(path))
    with pytest.raises(ConfigError, match="not found"):
        read_jsonl(str(tmp_path / "absent.jsonl"))


def test_csv_is_lossless(tmp_path):
    value = 1 / 3
    path = write_csv(str(tmp_path / "table.csv"), ['a', 'b'], [(value, 2.0), (0.1, -1e-300)])
    header, rows = read_csv(path)
    assert header == ['a', 'b']
    assert rows[0, 0] == value
    assert rows[1, 1] == -1e-300


def test_table_formats(tmp_path):
    stem = str(tmp_path / "series")
    assert write_table(stem, ['t', 'x'], [(0.0, 1.0)]).endswith('series.csv')
    path = write_table(stem, ['t', 'x'], [(0.0, 1.0), (1.0, 2.0)], fmt='jsonl')
    assert [record['x'] for record in read_jsonl(path)] == [1.0, 2.0]
    with pytest.raises(ConfigError, match="format"):
        write_table(stem, ['t'], [], fmt='parquet')


def test_correlation_records_reload(tmp_path, basis):
    alphas = np.linspace(0.5, 2.0, basis.n_modes) * np.exp(1j * np.arange(basis.n_modes))
    corr = correlations(TrialState.squeezed(alphas, {(4, 6): 0.2j}, drive_mode=10), basis)
    path = write_jsonl(str(tmp_path / "corr.jsonl"), correlation_records(corr))
    loaded = correlations_from_records(read_jsonl(path))
    np.testing.assert_array_equal(loaded.N, corr.N)
    np.testing.assert_array_equal(loaded.A, corr.A)
    np.testing.assert_array_equal(loaded.Q, corr.Q)
    np.testing.assert_array_equal(loaded.omega, corr.omega)
    assert loaded.label == 'squeezed'


def test_missing_values_reload_as_nan(tmp_path, basis):
    corr = correlations(TrialState.coherent(np.ones(basis.n_modes)), basis)
    corr.N[1, 1] = np.nan
    loaded = correlations_from_records(read_jsonl(write_jsonl(str(tmp_path / "c.jsonl"), correlation_records(corr))))
    assert math.isnan(loaded.N[1, 1].real)
    with pytest.raises(ConfigError, match="modes record"):
        correlations_from_records([])


def test_measurement_records_reload(tmp_path):
    measurements = [Measurement(7, None, 0.0), Measurement(4, 5)]
    measured = [[FourierComponent(1.0, 2 - 1j, 'Q(1)')],
                [FourierComponent(0.0, 3 + 0j, 'DC'), FourierComponent(2.0, 1j, 'A(1,1)')]]
    path = write_jsonl(str(tmp_path / "m.jsonl"), measurement_records(measurements, measured))
    settings, loaded = measured_from_records(read_jsonl(path))
    assert settings == [m.as_dict() for m in measurements]
    assert loaded == measured
