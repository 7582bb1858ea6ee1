import math

import numpy as np
import pytest

import experiment
from cli import build_parser, main
from errors import ConvergenceError
from experiment import ExperimentRunner
from experiment_config import load_experiment
from export import correlations_from_records, read_csv, read_jsonl


@pytest.fixture(scope="module")
def steady_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert main(["--out-dir", str(out), "dynamics"]) == 0
    return out


def test_parser_defaults():
    args = build_parser().parse_args(["probe"])
    assert args.command == 'probe'
    assert args.format == 'csv'
    assert args.preset is None
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--format", "xlsx", "probe"])


def test_dynamics_outputs(steady_dir):
    header, rows = read_csv(str(steady_dir / "trajectory.csv"))
    assert header[0] == 't'
    assert np.all(rows[:, 1:] >= 0.0)
    steady = read_jsonl(str(steady_dir / "steady_state.jsonl"))[0]
    assert steady['converged'] is True
    assert steady['populations'][9] == pytest.approx(steady['Omega0'] / steady['kappa'], rel=1e-2)


def test_dynamics_is_deterministic(steady_dir, tmp_path):
    assert main(["--out-dir", str(tmp_path), "dynamics"]) == 0
    for name in ("trajectory.csv", "steady_state.jsonl"):
        assert (tmp_path / name).read_bytes() == (steady_dir / name).read_bytes()


def test_correlations_use_the_steady_state(steady_dir, tmp_path):
    steady = str(steady_dir / "steady_state.jsonl")
    assert main(["--out-dir", str(tmp_path), "--seed", "5", "correlations", "--steady-state", steady]) == 0
    coherent = correlations_from_records(read_jsonl(str(tmp_path / "correlations_coherent.jsonl")))
    populations = read_jsonl(steady)[0]['populations']
    np.testing.assert_allclose(np.diag(coherent.N).real, np.clip(populations, 0.0, None), rtol=1e-12)

    differences = read_jsonl(str(tmp_path / "correlation_differences.jsonl"))
    assert differences

    first = (tmp_path / "correlations_squeezed.jsonl").read_bytes()
    assert main(["--out-dir", str(tmp_path), "--seed", "5", "correlations", "--steady-state", steady]) == 0
    assert (tmp_path / "correlations_squeezed.jsonl").read_bytes() == first


def test_missing_steady_state_is_a_config_error(tmp_path):
    assert main(["--out-dir", str(tmp_path), "correlations"]) == 1
    assert not (tmp_path / "correlations_coherent.jsonl").exists()


def test_probe_two_tone(tmp_path):
    assert main(["--out-dir", str(tmp_path), "--format", "jsonl", "probe"]) == 0
    peaks = read_jsonl(str(tmp_path / "peaks.jsonl"))
    assert sorted(round(peak['frequency_over_omega0']) for peak in peaks[:4]) == [1, 6, 7, 8]
    assert (tmp_path / "spectrum.jsonl").exists()
    assert not (tmp_path / "spectrum.csv").exists()


def test_report_and_plan(tmp_path):
    assert main(["--out-dir", str(tmp_path), "report"]) == 0
    records = {record['record']: record for record in read_jsonl(str(tmp_path / "report.jsonl"))}
    assert set(records) >= {'circuit', 'coupling', 'degeneracy', 'probe'}
    assert records['probe']['beta_dc'] == pytest.approx(1 / 3)

    assert main(["--out-dir", str(tmp_path), "plan"]) == 0
    plan = read_jsonl(str(tmp_path / "plan.jsonl"))
    assert plan


def test_extract_round_trip(steady_dir, tmp_path):
    steady = str(steady_dir / "steady_state.jsonl")
    synthesized = tmp_path / "synthesized"
    assert main(["--out-dir", str(synthesized), "extract", "--steady-state", steady]) == 0
    summary = read_jsonl(str(synthesized / "extraction_report.jsonl"))[-1]
    assert summary['record'] == 'summary'
    assert summary['complete'] is True
    assert summary['max_relative_error'] < 1e-6
    assert summary['max_squeezing_error'] < 1e-6

    report = read_jsonl(str(synthesized / "extraction_report.jsonl"))
    table = [record for record in report if record['record'] == 'S']
    assert len(table) == 2 * 55
    sums = [record for record in table if record['channel'] == 'sum']
    strongest = max(sums, key=lambda record: math.hypot(record['re'], record['im']))
    assert strongest['n'] + strongest['m'] == 10
    text = (synthesized / "extraction_report.txt").read_text()
    assert text.startswith("Extraction report")
    assert "complete:             yes" in text

    replayed = tmp_path / "replayed"
    measurements = str(synthesized / "measurements.jsonl")
    assert main(["--out-dir", str(replayed), "extract", "--measurements", measurements]) == 0
    first = correlations_from_records(read_jsonl(str(synthesized / "recovered.jsonl")))
    second = correlations_from_records(read_jsonl(str(replayed / "recovered.jsonl")))
    np.testing.assert_allclose(second.N, first.N, rtol=1e-9, atol=0)
    np.testing.assert_allclose(second.A, first.A, rtol=1e-9, atol=0)


def test_bad_config_file(tmp_path):
    overlay = tmp_path / "bad.toml"
    overlay.write_text('[ladder]\nL = 254\n')
    assert main(["--config", str(overlay), "--out-dir", str(tmp_path), "report"]) == 1


def test_usage_errors_exit_one(capsys):
    assert main(["--bogus", "report"]) == 1
    assert main([]) == 1
    assert main(["--help"]) == 0
    assert "usage" in capsys.readouterr().out


@pytest.mark.parametrize("command", [["probe"], ["plan"], ["report"], ["extract"]])
def test_reruns_are_byte_identical(steady_dir, tmp_path, command):
    if command[0] == 'extract':
        command = command + ["--steady-state", str(steady_dir / "steady_state.jsonl")]
    for run in ("first", "second"):
        assert main(["--out-dir", str(tmp_path / run), "--seed", "3"] + command) == 0
    names = sorted(path.name for path in (tmp_path / "first").iterdir())
    assert names == sorted(path.name for path in (tmp_path / "second").iterdir())
    for name in names:
        assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()


def test_coherent_extraction_has_no_squeezing(steady_dir, tmp_path):
    overlay = tmp_path / "coherent.toml"
    overlay.write_text('[state]\nkind = "coherent"\n')
    steady = str(steady_dir / "steady_state.jsonl")
    assert main(["--config", str(overlay), "--out-dir", str(tmp_path), "extract", "--steady-state", steady]) == 0
    summary = read_jsonl(str(tmp_path / "extraction_report.jsonl"))[-1]
    assert summary['squeezing_support_sum'] == []
    assert summary['squeezing_support_difference'] == []
    assert "none: every S_nm vanishes" in (tmp_path / "extraction_report.txt").read_text()


def test_failed_dynamics_reports_partial_output(tmp_path, monkeypatch):
    def no_steady_state(model):
        raise ConvergenceError("steady state not reached", residual=1.0, time=0.0)

    monkeypatch.setattr(experiment, 'steady_state', no_steady_state)
    runner = ExperimentRunner(load_experiment(), out_dir=str(tmp_path))
    result = runner.run_dynamics()
    assert not result['success']
    assert result['exit_code'] == 2
    assert result['files'] == [str(tmp_path / "trajectory.csv")]
    assert not (tmp_path / "steady_state.jsonl").exists()
