import math

import numpy as np
import pytest

from scipy.optimize import brentq

from circuit import CouplingTensor, build_coupling_tensor, build_mode_basis
from dynamics import (
    RateModel,
    default_gamma,
    downconversion_rhs,
    energy_weighted_sum,
    evolve,
    population_fluctuations,
    relaxation_time,
    steady_state,
)
from errors import ConfigError


@pytest.fixture(scope="module")
def cascade_model(cascade_experiment):
    ladder = cascade_experiment.ladder
    basis = build_mode_basis(ladder)
    return RateModel.from_config(ladder, basis, build_coupling_tensor(ladder, basis))


@pytest.fixture(scope="module")
def table_model(ladder, basis, tensor):
    return RateModel.from_config(ladder, basis, tensor)


def test_default_gamma(table_model, tensor, basis):
    assert table_model.Gamma == pytest.approx(default_gamma(tensor.g, basis.omega0))
    assert table_model.Gamma == pytest.approx((2 * math.pi * 5e6) ** 2 / basis.omega0)


def test_gamma_override(cascade_model):
    n, m, l, values = cascade_model.tensor.triples()
    assert cascade_model.Gamma == pytest.approx(2 * math.pi * 11.22762e6)
    # Γ·max A² sits at κ/20
    assert cascade_model.Gamma * np.max(values ** 2) == pytest.approx(cascade_model.kappa / 20, rel=1e-3)


def test_no_coupling_is_exponential(table_model):
    model = table_model.with_rates(Gamma=0.0)
    kappa, Omega0 = model.kappa, model.Omega0
    trajectory = evolve(None, model, 10 / kappa, n_samples=201)
    expected = Omega0 / kappa * (1 - np.exp(-kappa * trajectory.times))
    np.testing.assert_allclose(trajectory.mode(model.drive_mode), expected, rtol=1e-6, atol=1e-9)
    others = np.delete(trajectory.populations, model.drive_mode - 1, axis=1)
    assert np.all(others == 0.0)


def test_relaxation_time_of_exponential(table_model):
    model = table_model.with_rates(Gamma=0.0)
    trajectory = evolve(None, model, 20 / model.kappa, n_samples=2001)
    steady = np.zeros(model.n_modes)
    steady[model.drive_mode - 1] = model.Omega0 / model.kappa
    assert relaxation_time(trajectory, steady) == pytest.approx(math.log(20) / model.kappa, abs=0.02 / model.kappa)


def test_downconversion_conserves_energy(cascade_model):
    model = cascade_model.with_rates(kappa=0.0, Omega0=0.0)
    initial = np.zeros(model.n_modes)
    initial[model.drive_mode - 1] = 20.0
    initial[2] = 1.0
    trajectory = evolve(initial, model, 0.02, n_samples=51)
    energy = trajectory.energy()
    np.testing.assert_allclose(energy, energy[0], rtol=1e-6)
    assert trajectory.final[model.drive_mode - 1] < 20.0
    assert np.all(trajectory.populations >= 0.0)


def test_populations_never_negative(cascade_model):
    trajectory = evolve(None, cascade_model, 5 / cascade_model.kappa, n_samples=101)
    assert np.all(trajectory.populations >= 0.0)


def test_jacobian_matches_finite_differences(cascade_model):
    rng = np.random.default_rng(5)
    populations = rng.uniform(0.5, 10.0, cascade_model.n_modes)
    jac = cascade_model.jacobian(populations)
    step = 1e-6
    for k in range(cascade_model.n_modes):
        shifted = populations.copy()
        shifted[k] += step
        column = (cascade_model.rhs(shifted) - cascade_model.rhs(populations)) / step
        np.testing.assert_allclose(jac[:, k], column, rtol=1e-4, atol=1e-6 * cascade_model.kappa)


def test_weak_coupling_steady_state(table_model):
    steady = steady_state(table_model)
    assert steady.converged
    drive = table_model.drive_mode - 1
    assert steady.populations[drive] == pytest.approx(table_model.Omega0 / table_model.kappa, rel=1e-2)
    assert steady.residual < steady.tolerance


def test_cascade_overshoot_and_few_modes(cascade_model):
    kappa = cascade_model.kappa
    steady = steady_state(cascade_model)
    trajectory = evolve(None, cascade_model, 20 / kappa, n_samples=2001)
    drive = cascade_model.drive_mode

    overshoot = trajectory.mode(drive).max() / steady.populations[drive - 1] - 1
    assert 0.05 < overshoot < 0.2

    populated = np.nonzero(steady.populations > 0.01 * steady.populations.max())[0] + 1
    assert drive in populated
    assert 5 in populated
    assert len(populated) <= 4
    np.testing.assert_allclose(np.abs(cascade_model.rhs(steady.populations)).max(), 0.0,
                               atol=steady.tolerance)


def test_invalid_inputs(table_model):
    with pytest.raises(ConfigError):
        evolve(-np.ones(table_model.n_modes), table_model, 1.0)
    with pytest.raises(ConfigError):
        evolve(None, table_model, 0.0)
    with pytest.raises(ConfigError):
        table_model.rhs(np.zeros(3))
    with pytest.raises(ConfigError):
        steady_state(table_model.with_rates(kappa=0.0))
    with pytest.raises(ConfigError):
        table_model.with_rates(Gamma=-1.0)


def test_summaries():
    populations = np.array([4.0, 0.0, 1.0])
    assert energy_weighted_sum(populations) == pytest.approx(7.0)
    np.testing.assert_allclose(population_fluctuations(populations), [2.0, 0.0, 1.0])


# =============================================================================
# TWO-MODE TOY: 10 -> 5 + 5
# =============================================================================

KAPPA = 1e3
OMEGA0 = 1e4


@pytest.fixture(scope="module")
def pair_model():
    tensor = CouplingTensor(entries={(5, 5, 10): 1.0}, g=0.0, n_modes=10)
    return RateModel(tensor=tensor, Gamma=KAPPA, kappa=KAPPA, drive_mode=10, Omega0=OMEGA0)


def _pair_balance(n5, model):
    # N10 follows from the energy balance κN5/2 = Ω0 − κN10
    n10 = model.Omega0 / model.kappa - n5 / 2
    return model.Gamma * ((n5 + 1) ** 2 * n10 - n5 ** 2 * (n10 + 1)) - model.kappa * n5


def test_pair_steady_state_matches_root(pair_model):
    c = pair_model.Omega0 / pair_model.kappa
    n5 = brentq(_pair_balance, 0.0, 2 * c, args=(pair_model,), xtol=1e-14)
    steady = steady_state(pair_model)
    assert steady.converged
    assert steady.populations[4] == pytest.approx(n5, rel=1e-6)
    assert steady.populations[9] == pytest.approx(c - n5 / 2, rel=1e-6)
    others = np.delete(steady.populations, [4, 9])
    np.testing.assert_allclose(others, 0.0, atol=1e-12)


def test_long_evolution_reaches_steady_state(pair_model):
    steady = steady_state(pair_model)
    trajectory = evolve(None, pair_model, 60 / pair_model.kappa, n_samples=2)
    np.testing.assert_allclose(trajectory.final, steady.populations, rtol=1e-5, atol=1e-9)


def test_undriven_uncoupled_decay(table_model):
    model = table_model.with_rates(Gamma=0.0, Omega0=0.0)
    initial = np.linspace(1.0, 10.0, model.n_modes)
    trajectory = evolve(initial, model, 5 / model.kappa, n_samples=101)
    expected = initial[None, :] * np.exp(-model.kappa * trajectory.times)[:, None]
    np.testing.assert_allclose(trajectory.populations, expected, rtol=1e-6)
    assert np.all(np.diff(trajectory.populations, axis=0) <= 0.0)


def test_downconversion_from_vacuum_is_zero(cascade_model):
    np.testing.assert_array_equal(downconversion_rhs(np.zeros(cascade_model.n_modes), cascade_model), 0.0)


def test_single_photon_decays_into_pairs(cascade_model):
    populations = np.zeros(cascade_model.n_modes)
    populations[9] = 1.0
    derivative = downconversion_rhs(populations, cascade_model)
    tensor, Gamma = cascade_model.tensor, cascade_model.Gamma

    expected = [Gamma * tensor.value(n, 10 - n, 10) ** 2 for n in range(1, 10)]
    np.testing.assert_allclose(derivative[:9], expected, rtol=1e-12)
    assert np.all(derivative[:9] >= 0.0)
    parent = Gamma * (sum(tensor.value(n, 10 - n, 10) ** 2 for n in range(1, 5))
                      + 0.5 * tensor.value(5, 5, 10) ** 2)
    assert derivative[9] == pytest.approx(-parent, rel=1e-12)
    assert energy_weighted_sum(derivative) == pytest.approx(0.0, abs=1e-9 * parent)
    with pytest.raises(ConfigError):
        downconversion_rhs(np.zeros(3), cascade_model)
