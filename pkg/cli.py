"""
Sullam CLI
==========
Command-line front end for the ladder simulator.

    python cli.py dynamics                         # default presets
    python cli.py --preset table1_system --preset cascade_dynamics dynamics
    python cli.py correlations --steady-state out/steady_state.jsonl
    python cli.py probe --format jsonl
    python cli.py plan
    python cli.py extract --measurements out/measurements.jsonl
    python cli.py report

Exit codes: 0 success, 1 usage/config error, 2 convergence failure,
3 regime violation.
"""

import argparse
import logging
import sys

from config import Config
from errors import SullamError
from experiment import ExperimentRunner
from experiment_config import load_experiment
from export import TABLE_FORMATS

logger = logging.getLogger(__name__)

SUBCOMMANDS = ('dynamics', 'correlations', 'probe', 'plan', 'extract', 'report')


def setup_logging(level: str = None):
    logging.basicConfig(
        level=getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s | %(levelname)s | %(name)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='sullam',
        description="LC-ladder squeezing simulator: dynamics, trial states, probe readout and correlator extraction.",
    )
    parser.add_argument("--config", default=None, help="Experiment TOML applied over the presets.")
    parser.add_argument(
        "--preset",
        action="append",
        default=None,
        help=f"Preset name or path; repeat to merge in order. Default: {', '.join(Config.DEFAULT_PRESETS)}.",
    )
    parser.add_argument("--seed", type=int, default=None, help="Seed for trial-state phases and noise.")
    parser.add_argument("--out-dir", default=None, help=f"Output directory. Default: {Config.OUT_DIR}.")
    parser.add_argument(
        "--format",
        choices=TABLE_FORMATS,
        default='csv',
        help="Format of time series and spectra. Default: csv.",
    )
    parser.add_argument("--log-level", default=None, help="Overrides SULLAM_LOG_LEVEL.")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("dynamics", help="Integrate the rate equations and find the steady state.")
    correlations = commands.add_parser("correlations", help="Correlators of the coherent, Fock and squeezed states.")
    probe = commands.add_parser("probe", help="Probe readout, power spectrum and peaks.")
    commands.add_parser("plan", help="Choose probe site pairs for full correlator recovery.")
    extract = commands.add_parser("extract", help="Recover correlators from probe measurements.")
    commands.add_parser("report", help="Derived constants, discrepancy flags and design checks.")

    for sub in (correlations, probe, extract):
        sub.add_argument("--steady-state", default=None,
                         help="Steady-state JSON-lines file. Default: <out-dir>/steady_state.jsonl.")
    extract.add_argument("--measurements", default=None,
                         help="Measurement JSON-lines file. Default: synthesize from the configured state.")
    return parser


def run(args) -> dict:
    config = load_experiment(presets=args.preset, config_path=args.config)
    runner = ExperimentRunner(config, out_dir=args.out_dir, seed=args.seed, fmt=args.format)

    if args.command == 'dynamics':
        return runner.run_dynamics()
    if args.command == 'correlations':
        return runner.run_correlations(steady_path=args.steady_state)
    if args.command == 'probe':
        return runner.run_probe(steady_path=args.steady_state)
    if args.command == 'plan':
        return runner.run_plan()
    if args.command == 'extract':
        return runner.run_extract(measurements_path=args.measurements, steady_path=args.steady_state)
    return runner.run_report()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors; 2 is reserved for convergence failures
        return 0 if e.code in (0, None) else 1
    setup_logging(args.log_level)

    problems = Config.validate()
    if problems:
        for problem in problems:
            logger.error(f"Invalid environment setting: {problem}")
        return 1

    try:
        result = run(args)
    except SullamError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected error in '{args.command}': {e}")
        return 1

    for path in result['files']:
        print(f"wrote {path}")
    for warning in result['warnings']:
        print(f"warning: {warning}")
    if result['error']:
        print(f"error: {result['error']}", file=sys.stderr)
    return result['exit_code']


if __name__ == "__main__":
    sys.exit(main())
