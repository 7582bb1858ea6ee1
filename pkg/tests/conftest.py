"""Shared fixtures: the tabulated ladder, its mode basis and coupling tensor, and the probe."""

import os
import sys

import pytest

# Make the repo root importable when pytest runs from anywhere
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from circuit import build_coupling_tensor, build_mode_basis
from experiment_config import load_experiment


@pytest.fixture(scope="session")
def experiment():
    return load_experiment(presets=['table1_system', 'table2_probe'])


@pytest.fixture(scope="session")
def cascade_experiment():
    return load_experiment(presets=['table1_system', 'table2_probe', 'cascade_dynamics'])


@pytest.fixture(scope="session")
def ladder(experiment):
    return experiment.ladder


@pytest.fixture(scope="session")
def basis(ladder):
    return build_mode_basis(ladder)


@pytest.fixture(scope="session")
def tensor(ladder, basis):
    return build_coupling_tensor(ladder, basis)


@pytest.fixture(scope="session")
def probe(experiment):
    return experiment.probe
