"""
Reproduce Figure Data
=====================
Thin CLI wrapper that runs every stage for the shipped presets and writes
figure-ready data files.

#   python scripts/reproduce_figures.py                    # into out/figures
#   python scripts/reproduce_figures.py --out-dir /tmp/fig --seed 7
# Outputs one sub-directory per experiment:
#   two_tone/   readout and spectrum of the 4ω0/3ω0 test signal
#   tabulated/  report and degeneracy plan for the tabulated ladder
#   cascade/    dynamics, correlators, extraction round trip
"""

import argparse
import os
import sys

# Make the repo root importable when run as `python scripts/reproduce_figures.py`
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli import setup_logging
from experiment import ExperimentRunner
from experiment_config import load_experiment

EXPERIMENTS = {
    'two_tone': (['table1_system', 'table2_probe'], ['run_probe']),
    'tabulated': (['table1_system', 'table2_probe'], ['run_report', 'run_plan']),
    'cascade': (['table1_system', 'table2_probe', 'cascade_dynamics'],
                ['run_dynamics', 'run_correlations', 'run_extract']),
}


def main():
    parser = argparse.ArgumentParser(
        description="Run every simulator stage for the shipped presets."
    )
    parser.add_argument(
        "--out-dir",
        default=os.path.join("out", "figures"),
        help="Root output directory. Default: out/figures.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Seed for trial-state phases. Default: SULLAM_SEED.",
    )
    args = parser.parse_args()
    setup_logging()

    exit_code = 0
    for name, (presets, stages) in EXPERIMENTS.items():
        runner = ExperimentRunner(load_experiment(presets=presets), out_dir=os.path.join(args.out_dir, name),
                                  seed=args.seed)
        print(f"\n{name}:")
        for stage in stages:
            result = getattr(runner, stage)()
            status = "ok" if result['success'] else f"FAILED ({result['error']})"
            print(f"  {stage}: {status} | files: {len(result['files'])} | warnings: {len(result['warnings'])}")
            exit_code = max(exit_code, result['exit_code'])

    return exit_code


if __name__ == "__main__":
    sys.exit(main())
