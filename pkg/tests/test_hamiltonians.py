import numpy as np
import pytest

from src.errors import HamiltonianError, StateError
from src.hamiltonians import (
    DIABATIC_ROTATION,
    ModelSpec,
    adiabatic_corrections,
    adiabatic_potentials,
    adiabatic_transform,
    build_split,
    coupling_magnitude,
    is_hermitian,
    lambda_adiabatic_potentials,
    lambda_potential,
    lambda_reduce,
    potential_curves,
    spectator_split,
    to_adiabatic_basis,
)
from src.states import MultiChannelWavefunction

X = np.linspace(-6.0, 6.0, 49)
RABI = ModelSpec("Rabi", omega=0.7, g0=1.3)
JC = ModelSpec("JC", omega=0.7, g0=1.3)
LAMBDA = ModelSpec("Lambda", omega=1.5, lambda1=0.4, lambda2=0.9)


def _rotate(matrices):
    return DIABATIC_ROTATION @ matrices @ DIABATIC_ROTATION.conj().T


@pytest.mark.parametrize("spec", [RABI, JC, LAMBDA])
def test_blocks_are_hermitian_stacks(spec):
    split = build_split(spec)
    c = spec.n_channels

    assert split.x_block(X).shape == (X.size, c, c)
    assert split.p_block(X).shape == (X.size, c, c)
    assert split.x_block(0.3).shape == (c, c)
    assert is_hermitian(split.x_block(X))
    assert is_hermitian(split.p_block(X))


def test_rabi_bare_entries():
    block = build_split(RABI).x_block(2.0)
    assert block[0, 0] == pytest.approx(2.0 + 0.35)
    assert block[1, 1] == pytest.approx(2.0 - 0.35)
    assert block[0, 1] == pytest.approx(np.sqrt(2.0) * 1.3 * 2.0)


def test_jc_coupling_combines_to_raising_operator():
    split = build_split(JC)
    x, p = 1.1, -0.4
    total = split.x_block(x) + split.p_block(p)
    # top-right entry (g0/sqrt 2)(x + i p)
    assert total[0, 1] == pytest.approx(1.3 / np.sqrt(2.0) * (x + 1j * p))
    assert total[1, 0] == pytest.approx(1.3 / np.sqrt(2.0) * (x - 1j * p))


@pytest.mark.parametrize("spec", [RABI, JC])
def test_rotated_blocks_match_conjugated_bare_blocks(spec):
    bare = build_split(spec, "bare")
    rotated = build_split(spec, "rotated")

    assert rotated.basis_tag == "rotated"
    np.testing.assert_allclose(rotated.x_block(X), _rotate(bare.x_block(X)), atol=1e-12)
    np.testing.assert_allclose(rotated.p_block(X), _rotate(bare.p_block(X)), atol=1e-12)


def test_rotated_rabi_is_displaced_oscillators():
    block = build_split(RABI, "rotated").x_block(X)
    shift = np.sqrt(2.0) * RABI.g0
    np.testing.assert_allclose(block[:, 0, 0].real, 0.5 * (X + shift) ** 2 - RABI.g0 ** 2, atol=1e-12)
    np.testing.assert_allclose(block[:, 1, 1].real, 0.5 * (X - shift) ** 2 - RABI.g0 ** 2, atol=1e-12)
    np.testing.assert_allclose(block[:, 0, 1], 0.35, atol=1e-15)


def test_adiabatic_transform_diagonalizes():
    _, unitary = adiabatic_transform(RABI, X)
    coupling = build_split(RABI).x_block(X) - 0.5 * X[:, None, None] ** 2 * np.eye(2)

    diagonal = np.conj(np.swapaxes(unitary, -1, -2)) @ coupling @ unitary
    gap = coupling_magnitude(RABI, X)
    np.testing.assert_allclose(diagonal[:, 0, 0].real, gap, atol=1e-12)
    np.testing.assert_allclose(diagonal[:, 1, 1].real, -gap, atol=1e-12)
    np.testing.assert_allclose(diagonal[:, 0, 1], 0.0, atol=1e-12)


def test_angle_derivatives_match_finite_differences():
    h = 1e-4
    theta_plus, _ = adiabatic_transform(RABI, X + h)
    theta_minus, _ = adiabatic_transform(RABI, X - h)
    theta, _ = adiabatic_transform(RABI, X)
    dtheta, d2theta = adiabatic_corrections(RABI, X)

    np.testing.assert_allclose((theta_plus - theta_minus) / (2 * h), dtheta, atol=1e-6)
    np.testing.assert_allclose((theta_plus - 2 * theta + theta_minus) / h ** 2, d2theta, atol=1e-4)


def test_adiabatic_potentials_bracket_the_crossing():
    upper, lower = adiabatic_potentials(RABI, X)
    dtheta, _ = adiabatic_corrections(RABI, X)

    assert np.all(upper > lower)
    np.testing.assert_allclose(upper - lower, 2 * coupling_magnitude(RABI, X), atol=1e-12)
    np.testing.assert_allclose(upper + lower, X ** 2 + 2 * dtheta ** 2, atol=1e-12)


def test_zero_splitting_limits():
    resonant = ModelSpec("Rabi", omega=0.0, g0=1.0)
    theta, _ = adiabatic_transform(resonant, np.array([-2.0, 0.0, 2.0]))
    np.testing.assert_allclose(theta, [-np.pi / 4, 0.0, np.pi / 4])

    with pytest.raises(HamiltonianError):
        adiabatic_corrections(resonant, X)


def test_to_adiabatic_basis_requires_bare_position_state(small_grid):
    psi = MultiChannelWavefunction(np.ones((2, 256)), small_grid, basis_tag="rotated")
    with pytest.raises(StateError):
        to_adiabatic_basis(psi, RABI)


def test_adiabatic_projection_preserves_pointwise_weight(small_grid):
    rng = np.random.default_rng(0)
    channels = rng.normal(size=(2, 256)) + 1j * rng.normal(size=(2, 256))
    psi = MultiChannelWavefunction(channels, small_grid)

    projected = to_adiabatic_basis(psi, RABI)
    assert projected.basis_tag == "adiabatic"
    np.testing.assert_allclose(
        np.sum(np.abs(projected.channels) ** 2, axis=0),
        np.sum(np.abs(channels) ** 2, axis=0),
        rtol=1e-12,
    )


def test_lambda_reduction_decouples_the_dark_state():
    reduction = lambda_reduce(LAMBDA)
    np.testing.assert_allclose(reduction.u3 @ reduction.u3.T, np.eye(3), atol=1e-14)

    rotated = reduction.u3 @ lambda_potential(LAMBDA, X) @ reduction.u3.T
    np.testing.assert_allclose(rotated, reduction.potential(X), atol=1e-12)
    np.testing.assert_allclose(rotated[:, 2, :2], 0.0, atol=1e-12)


def test_lambda_reduction_needs_coupling():
    with pytest.raises(HamiltonianError):
        lambda_reduce(ModelSpec("Lambda", omega=1.0))


def test_lambda_adiabatic_potentials_are_shifted_eigenvalues():
    upper, dark, lower = lambda_adiabatic_potentials(LAMBDA, X, exact=True)
    dphi_squared = dark - 0.5 * X ** 2
    eigenvalues = np.linalg.eigvalsh(lambda_potential(LAMBDA, X))

    np.testing.assert_allclose(eigenvalues[:, 0] + dphi_squared, lower, atol=1e-10)
    np.testing.assert_allclose(eigenvalues[:, 1] + dphi_squared, dark, atol=1e-10)
    np.testing.assert_allclose(eigenvalues[:, 2] + dphi_squared, upper, atol=1e-10)


def test_default_radicand_uses_lambda2():
    upper, dark, lower = lambda_adiabatic_potentials(LAMBDA, X)
    np.testing.assert_allclose(upper - lower, 2.0 * np.sqrt(0.25 * 1.5 ** 2 + 2.0 * 0.9 ** 2 * X ** 2), atol=1e-12)

    exact_upper, exact_dark, _ = lambda_adiabatic_potentials(LAMBDA, X, exact=True)
    np.testing.assert_allclose(dark, exact_dark, atol=1e-15)
    # unequal couplings: the two radicands only meet at x = 0
    assert np.all(upper[X != 0] > exact_upper[X != 0])


def test_radicands_agree_for_equal_couplings():
    symmetric = ModelSpec("Lambda", omega=1.0, lambda1=0.6, lambda2=0.6)
    for default, exact in zip(
        lambda_adiabatic_potentials(symmetric, X),
        lambda_adiabatic_potentials(symmetric, X, exact=True),
    ):
        np.testing.assert_allclose(default, exact, atol=1e-12)


def test_reduced_and_spectator_splits():
    reduced = build_split(LAMBDA, "reduced")
    assert reduced.n_channels == 2
    assert reduced.basis_tag == "reduced"
    np.testing.assert_allclose(reduced.x_block(0.5)[0, 1], LAMBDA.lambda0 * 0.5)

    dark = spectator_split()
    assert dark.x_block(X).shape == (X.size, 1, 1)
    np.testing.assert_allclose(dark.x_block(X)[:, 0, 0], 0.5 * X ** 2)


@pytest.mark.parametrize(
    "spec, basis",
    [
        (ModelSpec("Dicke", omega=1.0, g0=0.3, n_atoms=10), "bare"),
        (JC, "reduced"),
        (LAMBDA, "rotated"),
    ],
)
def test_unavailable_splits_rejected(spec, basis):
    with pytest.raises(HamiltonianError):
        build_split(spec, basis)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"kind": "Holstein"},
        {"kind": "Rabi", "omega": -1.0},
        {"kind": "JC", "g0": np.nan},
        {"kind": "Dicke", "n_atoms": 0},
    ],
)
def test_invalid_model_parameters(kwargs):
    with pytest.raises(HamiltonianError):
        ModelSpec(**kwargs)


def test_potential_curve_columns():
    rabi = potential_curves(RABI, X)
    assert list(rabi.columns) == ["x", "V_d_plus", "V_d_minus", "V_ad_plus", "V_ad_minus"]
    # far from the crossing the lower adiabatic curve follows the lower diabatic one
    far = rabi.iloc[-1]
    assert far["V_ad_minus"] == pytest.approx(far["V_d_minus"], abs=0.05)

    lam = potential_curves(LAMBDA, X)
    assert list(lam.columns) == [
        "x", "V_plus", "V_zero", "V_minus", "V_plus_exact", "V_minus_exact"
    ]

    resonant = potential_curves(ModelSpec("Rabi", omega=0.0, g0=1.0), X)
    assert "V_ad_plus" not in resonant.columns

    with pytest.raises(HamiltonianError):
        potential_curves(JC, X)
