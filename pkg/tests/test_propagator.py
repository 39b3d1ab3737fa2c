import numpy as np
import pytest
from scipy.linalg import expm

from src.errors import ConfigError, HamiltonianError, StateError
from src.grid import make_grid
from src.hamiltonians import (
    ModelSpec,
    build_split,
    lambda_reduce,
    reduce_lambda_state,
    restore_lambda_basis,
    spectator_split,
)
from src.observables import density, inversion
from src.oracles import jc_ground_energy, jc_inversion_exact
from src.propagator import PropagationConfig, WavePacketPropagator, expm_channel, propagate, strang_step
from src.states import (
    MultiChannelWavefunction,
    coherent_coefficients,
    coherent_state,
    compose_initial,
    fock_coefficients,
    fock_state,
)


def _random_hermitian(rng, size, count):
    a = rng.normal(size=(count, size, size)) + 1j * rng.normal(size=(count, size, size))
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


@pytest.mark.parametrize("size", [1, 2, 3])
def test_expm_channel_matches_dense_exponential(size):
    rng = np.random.default_rng(size)
    matrices = _random_hermitian(rng, size, 5)

    result = expm_channel(matrices, 0.37)
    for matrix, unitary in zip(matrices, result):
        np.testing.assert_allclose(unitary, expm(-0.37j * matrix), atol=1e-12)


def test_expm_channel_edge_cases():
    rng = np.random.default_rng(11)
    matrices = _random_hermitian(rng, 2, 4)
    np.testing.assert_allclose(expm_channel(matrices, 0.0), np.broadcast_to(np.eye(2), (4, 2, 2)))

    # degenerate (r = 0) blocks
    diagonal = np.array([[1.5, 0.0], [0.0, 1.5]])
    np.testing.assert_allclose(expm_channel(diagonal, 0.2), np.exp(-0.3j) * np.eye(2), atol=1e-15)

    with pytest.raises(HamiltonianError):
        expm_channel(np.array([[0.0, 1.0], [0.0, 0.0]]), 0.1)
    with pytest.raises(HamiltonianError):
        expm_channel(np.zeros(3), 0.1)


@pytest.mark.parametrize(
    "kwargs",
    [{"dt": 0.0}, {"dt": 0.1, "t_final": 0.05}, {"snapshot_stride": 0}, {"density_stride": -1}],
)
def test_invalid_propagation_config(kwargs):
    with pytest.raises(ConfigError):
        PropagationConfig(**kwargs)


def test_with_dt_keeps_snapshot_times():
    base = PropagationConfig(dt=0.01, t_final=2.0, snapshot_stride=5)
    halved = base.with_dt(0.005)
    assert halved.snapshot_stride == 10
    assert halved.n_steps == 2 * base.n_steps


def test_trailing_steps_end_on_a_final_snapshot(small_grid, vacuum_excited):
    split = build_split(ModelSpec("JC", omega=1.0, g0=0.5))
    # 105 steps at stride 20: five full strides and five leftover steps
    uneven = propagate(vacuum_excited, split, PropagationConfig(dt=0.01, t_final=1.05, snapshot_stride=20))
    dense = propagate(vacuum_excited, split, PropagationConfig(dt=0.01, t_final=1.05, snapshot_stride=5))

    np.testing.assert_allclose(uneven.times, [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.05], atol=1e-12)
    assert uneven["inversion"].iloc[-1] == pytest.approx(dense["inversion"].iloc[-1], abs=1e-12)


def test_harmonic_eigenstate_only_acquires_phase(small_grid):
    fock = fock_state(3, small_grid)
    psi = MultiChannelWavefunction(fock[np.newaxis, :], small_grid, basis_tag="reduced")

    evolved = WavePacketPropagator(spectator_split(), small_grid, 0.005).step(psi, 200)
    overlap = small_grid.integrate(np.conj(fock) * evolved.channels[0])
    assert abs(overlap - np.exp(-3.5j)) < 1e-4


def test_state_checks(small_grid, vacuum_excited):
    propagator = WavePacketPropagator(build_split(ModelSpec("Rabi", omega=1.0, g0=0.5)), small_grid, 0.01)

    rotated = MultiChannelWavefunction(vacuum_excited.channels, small_grid, basis_tag="rotated")
    with pytest.raises(StateError):
        propagator.step(rotated)

    other_grid = make_grid(256, 12.0)
    moved = MultiChannelWavefunction(vacuum_excited.channels, other_grid)
    with pytest.raises(StateError):
        propagator.step(moved)

    with pytest.raises(ConfigError):
        propagator.run(vacuum_excited, PropagationConfig(dt=0.02, t_final=1.0))


def test_jc_ground_state_is_stationary(small_grid):
    spec = ModelSpec("JC", omega=0.6, g0=0.8)
    psi = compose_initial(fock_state(0, small_grid), [0.0, 1.0], small_grid)

    series = propagate(psi, build_split(spec), PropagationConfig(dt=0.01, t_final=5.0, snapshot_stride=50))
    np.testing.assert_allclose(series["inversion"], -1.0, atol=1e-6)
    np.testing.assert_allclose(series["energy"], jc_ground_energy(0.6), atol=1e-6)
    assert series["pop_plus"].max() < 1e-6


def test_norm_is_conserved(small_grid, coherent_superposition):
    spec = ModelSpec("Rabi", omega=1.0, g0=0.7)
    series = propagate(
        coherent_superposition, build_split(spec),
        PropagationConfig(dt=0.005, t_final=5.0, snapshot_stride=100),
    )
    assert series.valid
    assert np.max(np.abs(series["norm"] - 1.0)) < 1e-10


def test_global_error_is_second_order(small_grid, coherent_superposition):
    split = build_split(ModelSpec("Rabi", omega=1.0, g0=0.5))

    def evolve(dt):
        steps = int(round(1.0 / dt))
        return WavePacketPropagator(split, small_grid, dt).step(coherent_superposition, steps).channels

    reference = evolve(0.00125)
    coarse = np.sqrt(small_grid.integrate(np.sum(np.abs(evolve(0.02) - reference) ** 2, axis=0)))
    fine = np.sqrt(small_grid.integrate(np.sum(np.abs(evolve(0.01) - reference) ** 2, axis=0)))

    assert 3.3 < coarse / fine < 4.7


def test_energy_error_scales_with_dt_squared(small_grid, coherent_superposition):
    split = build_split(ModelSpec("Rabi", omega=1.0, g0=0.5))

    def drift(dt, stride):
        series = propagate(coherent_superposition, split, PropagationConfig(dt=dt, t_final=4.0, snapshot_stride=stride))
        return float(np.max(np.abs(series["energy"] - series["energy"].iloc[0])))

    coarse, fine = drift(0.02, 1), drift(0.01, 2)
    assert coarse < 1e-2
    assert 3.0 < coarse / fine < 5.0


def test_free_field_coherent_packet_oscillates(small_grid):
    spec = ModelSpec("Rabi", omega=0.5, g0=0.0)
    psi = compose_initial(coherent_state(1.0, small_grid), [1.0, 0.0], small_grid)

    series = propagate(psi, build_split(spec), PropagationConfig(dt=0.01, t_final=6.3, snapshot_stride=10))
    t = series.times
    np.testing.assert_allclose(series["x_plus"], np.sqrt(2.0) * np.cos(t), atol=5e-4)
    np.testing.assert_allclose(series["p_plus"], -np.sqrt(2.0) * np.sin(t), atol=5e-4)
    assert series["x_minus"].isna().all()
    assert series["dx"].isna().all()


def test_boundary_contact_aborts_and_keeps_rows(small_grid):
    spec = ModelSpec("Rabi", omega=0.5, g0=0.0)
    psi = compose_initial(coherent_state(6j, small_grid), [1.0, 0.0], small_grid)

    series = propagate(psi, build_split(spec), PropagationConfig(dt=0.01, t_final=3.0, snapshot_stride=5))
    assert not series.valid
    assert "Boundary" in series.abort_reason
    assert len(series) >= 1
    assert series.times[-1] < 3.0


def test_non_finite_amplitude_aborts(small_grid, vacuum_excited):
    channels = vacuum_excited.channels.copy()
    channels[0, 100] = np.nan
    psi = MultiChannelWavefunction(channels, small_grid)

    series = propagate(psi, build_split(ModelSpec("JC", omega=1.0, g0=0.5)), PropagationConfig(dt=0.01, t_final=1.0))
    assert not series.valid
    assert "Non-finite" in series.abort_reason
    assert len(series) == 0


def test_jc_excitation_number_is_conserved(small_grid, coherent_superposition):
    split = build_split(ModelSpec("JC", omega=1.0, g0=0.5))
    series = propagate(coherent_superposition, split, PropagationConfig(dt=1e-3, t_final=2.0, snapshot_stride=100))

    assert np.max(np.abs(series["n_exc"] - series["n_exc"].iloc[0])) < 1e-4


@pytest.mark.parametrize(
    "field_kind, omega, g0, t_final, dt",
    [
        ("vacuum", 0.2, 2.0, 3.0, 1e-3),
        ("fock2", 1.0, 0.5, 5.0, 2e-3),
        ("coherent", 1.0, 0.5, 5.0, 2e-3),
    ],
)
def test_jc_propagation_matches_exact_inversion(small_grid, field_kind, omega, g0, t_final, dt):
    if field_kind == "vacuum":
        field, coefficients = fock_state(0, small_grid), fock_coefficients(0)
    elif field_kind == "fock2":
        field, coefficients = fock_state(2, small_grid), fock_coefficients(2)
    else:
        field, coefficients = coherent_state(1.0, small_grid), coherent_coefficients(1.0)

    psi = compose_initial(field, [1.0, 0.0], small_grid)
    series = propagate(
        psi, build_split(ModelSpec("JC", omega=omega, g0=g0)),
        PropagationConfig(dt=dt, t_final=t_final, snapshot_stride=25),
    )
    exact = jc_inversion_exact(coefficients, [1.0, 0.0], omega, g0, series.times)

    np.testing.assert_allclose(series["inversion"], exact, atol=1e-4)


def test_fock_populations_stay_in_reachable_sectors(small_grid):
    psi = compose_initial(fock_state(2, small_grid), [1.0, 0.0], small_grid)
    series = propagate(
        psi, build_split(ModelSpec("JC", omega=1.0, g0=0.5)),
        PropagationConfig(dt=2e-3, t_final=3.0, snapshot_stride=250),
        observers=("fock",),
    )
    # |+, 2> only couples to |-, 3>
    reachable = series["fock_2"] + series["fock_3"]
    np.testing.assert_allclose(reachable, 1.0, atol=1e-5)


def test_rabi_packets_split_into_displaced_oscillators():
    grid = make_grid(512, 12.0)
    psi = compose_initial(fock_state(0, grid), [1.0, 0.0], grid)

    evolved = strang_step(psi, build_split(ModelSpec("Rabi", omega=0.2, g0=2.0)), 1e-3)
    evolved = WavePacketPropagator(
        build_split(ModelSpec("Rabi", omega=0.2, g0=2.0)), grid, 1e-3
    ).step(evolved, int(round(np.pi / 2 / 1e-3)) - 1)

    weights = density(evolved)
    left = grid.x[np.argmax(np.where(grid.x < 0, weights, 0.0))]
    right = grid.x[np.argmax(np.where(grid.x > 0, weights, 0.0))]
    assert left == pytest.approx(-2.83, abs=0.15)
    assert right == pytest.approx(2.83, abs=0.15)
    assert abs(inversion(evolved)) < 0.5


def test_reduced_lambda_run_restores_the_full_three_channel_run(small_grid):
    spec = ModelSpec("Lambda", omega=1.5, lambda1=0.4, lambda2=0.9)
    psi = compose_initial(coherent_state(1.0 + 0.5j, small_grid), [0.48, 0.6, 0.64], small_grid, n_channels=3)

    full = WavePacketPropagator(build_split(spec, "bare"), small_grid, 0.01).step(psi, 300)

    reduction = lambda_reduce(spec)
    active, dark = reduce_lambda_state(psi, reduction)
    active = WavePacketPropagator(build_split(spec, "reduced"), small_grid, 0.01).step(active, 300)
    dark = WavePacketPropagator(spectator_split(), small_grid, 0.01).step(dark, 300)
    restored = restore_lambda_basis(active, dark, reduction)

    assert restored.basis_tag == "bare"
    np.testing.assert_allclose(restored.channels, full.channels, atol=1e-10)
    # the dark spectator keeps its weight
    assert dark.norm() == pytest.approx(reduce_lambda_state(psi, reduction)[1].norm(), abs=1e-12)


def test_lambda_state_reduction_checks_its_inputs(small_grid, vacuum_excited):
    reduction = lambda_reduce(ModelSpec("Lambda", omega=1.0, lambda1=0.5, lambda2=0.5))
    with pytest.raises(StateError):
        reduce_lambda_state(vacuum_excited, reduction)

    three = compose_initial(fock_state(0, small_grid), [0.0, 1.0, 0.0], small_grid, n_channels=3)
    active, dark = reduce_lambda_state(three, reduction)
    with pytest.raises(StateError):
        restore_lambda_basis(dark, active, reduction)
    with pytest.raises(StateError):
        restore_lambda_basis(
            active, MultiChannelWavefunction(dark.channels, make_grid(256, 12.0), basis_tag="reduced"), reduction
        )
