import math

import numpy as np
import pytest

from src.errors import OracleError
from src.oracles import (
    crossing_velocity,
    jc_eigensystem,
    jc_ground_energy,
    jc_inversion_exact,
    jc_revival_time,
    landau_zener_probability,
    rabi_frequency,
    released_crossing_velocity,
    time_scales,
)
from src.states import coherent_coefficients, fock_coefficients


def test_rabi_frequency():
    assert rabi_frequency(49, 5.0, 0.15) == pytest.approx(2.25887, rel=1e-5)
    np.testing.assert_allclose(rabi_frequency([0, 1, 4], 1.0, 0.5), [0.0, 0.5, 1.0])


def test_resonant_sector():
    pair = jc_eigensystem(4, 1.0, 0.3)
    assert pair.energy_plus == pytest.approx(4.6)
    assert pair.energy_minus == pytest.approx(3.4)
    assert pair.theta == pytest.approx(np.pi / 4)
    assert pair.rabi == pytest.approx(0.6)


@pytest.mark.parametrize("n, omega, g0", [(1, 0.2, 2.0), (7, 5.0, 0.15), (30, 0.4, 1.3)])
def test_sector_vectors_diagonalize_the_block(n, omega, g0):
    pair = jc_eigensystem(n, omega, g0)
    diagonal = pair.vectors.T @ pair.sector_matrix(g0) @ pair.vectors
    np.testing.assert_allclose(
        diagonal, np.diag([pair.energy_plus, pair.energy_minus]), atol=1e-12
    )


def test_singlet_sector():
    pair = jc_eigensystem(0, 0.2, 2.0)
    assert pair.energy_plus == pair.energy_minus == jc_ground_energy(0.2) == pytest.approx(0.4)
    assert pair.theta == 0.0


@pytest.mark.parametrize("n", [-1, 2.5])
def test_invalid_sector(n):
    with pytest.raises(OracleError):
        jc_eigensystem(n, 1.0, 0.5)


def test_exact_inversion_known_cases():
    t = np.linspace(0.0, 10.0, 101)

    ground = jc_inversion_exact(fock_coefficients(0), [0.0, 1.0], 0.6, 0.8, t)
    np.testing.assert_allclose(ground, -1.0, atol=1e-15)

    resonant = jc_inversion_exact(fock_coefficients(0), [1.0, 0.0], 1.0, 0.7, t)
    np.testing.assert_allclose(resonant, np.cos(1.4 * t), atol=1e-12)

    # Delta = -0.8: 1 - 2 g0^2 / Omega_1^2 at the trough
    detuned = jc_inversion_exact(fock_coefficients(0), [1.0, 0.0], 0.2, 2.0, np.linspace(0.0, 3.0, 3001))
    assert detuned.min() == pytest.approx(1.0 - 8.0 / 4.16, abs=1e-5)


def test_exact_inversion_scalar_time():
    value = jc_inversion_exact(fock_coefficients(3), [1.0, 0.0], 1.0, 0.5, 0.0)
    assert isinstance(value, float)
    assert value == pytest.approx(1.0)


def test_exact_inversion_input_checks():
    with pytest.raises(OracleError):
        jc_inversion_exact(coherent_coefficients(3.0, n_max=5), [1.0, 0.0], 1.0, 0.5, 1.0)
    with pytest.raises(OracleError):
        jc_inversion_exact(fock_coefficients(0), [1.0, 1.0], 1.0, 0.5, 1.0)
    with pytest.raises(OracleError):
        jc_inversion_exact(fock_coefficients(0), [1.0, 0.0, 0.0], 1.0, 0.5, 1.0)


def test_exact_inversion_refuses_tails_above_1e12():
    # Poisson(1) beyond n = 12 holds about 6e-11
    clipped = coherent_coefficients(1.0, n_max=12)
    assert 1e-12 < 1.0 - np.sum(np.abs(clipped) ** 2) < 1e-9
    with pytest.raises(OracleError, match="truncation"):
        jc_inversion_exact(clipped, [1.0, 0.0], 1.0, 0.5, 1.0)


@pytest.mark.parametrize("nu", [0.5, 3.0, 7.0, 10.0])
def test_default_coherent_cut_passes_the_truncation_check(nu):
    coefficients = coherent_coefficients(nu)
    assert abs(1.0 - np.sum(np.abs(coefficients) ** 2)) < 1e-12
    assert -1.0 <= jc_inversion_exact(coefficients, [1.0, 0.0], 5.0, 0.15, 2.0) <= 1.0


def test_landau_zener_limits():
    assert landau_zener_probability(0.0, 0.15, 9.9) == pytest.approx(0.0)
    assert landau_zener_probability(5.0, 0.15, 9.8995) == pytest.approx(0.999913, abs=2e-6)


def test_landau_zener_monotonic_and_bounded():
    omegas = np.linspace(0.0, 3.0, 31)
    following = [landau_zener_probability(w, 1.0, 4.0) for w in omegas]
    assert np.all(np.diff(following) > 0)

    speeds = np.linspace(0.5, 20.0, 40)
    by_speed = [landau_zener_probability(1.0, 1.0, v) for v in speeds]
    assert np.all(np.diff(by_speed) < 0)

    rng = np.random.default_rng(42)
    draws = [
        landau_zener_probability(w, g, v)
        for w, g, v in zip(rng.uniform(0, 10, 10_000), rng.uniform(0.01, 5, 10_000), rng.uniform(0.01, 50, 10_000))
    ]
    assert min(draws) >= 0.0 and max(draws) <= 1.0


@pytest.mark.parametrize("g0, v", [(0.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_landau_zener_domain(g0, v):
    with pytest.raises(OracleError):
        landau_zener_probability(1.0, g0, v)


def test_crossing_velocity():
    assert crossing_velocity(0.15, x_initial=np.sqrt(2.0) * 7.0) == pytest.approx(9.89893, abs=1e-5)
    assert crossing_velocity(0.15, n_bar=49.0) == pytest.approx(9.89893, abs=1e-5)
    assert crossing_velocity(2.0, n_bar=4.0) == pytest.approx(np.sqrt(1.5) * 2.0)


def test_released_crossing_velocity_is_the_diabatic_energy_drop():
    for g0, x_i in [(1.0, 6.0), (2.0, 10.0), (0.15, 9.9)]:
        v = released_crossing_velocity(g0, x_i)
        # (x - sqrt(2) g0)^2/2 - g0^2 at x_i, minus its value 0 at the crossing
        assert 0.5 * v ** 2 == pytest.approx(0.5 * x_i ** 2 - np.sqrt(2.0) * g0 * x_i)
    assert released_crossing_velocity(0.0, 3.0) == 3.0
    assert released_crossing_velocity(2.0, 10.0) == pytest.approx(6.59025, abs=1e-4)


def test_released_packet_must_pass_the_turning_point():
    with pytest.raises(OracleError, match="does not reach"):
        released_crossing_velocity(2.0, 4.0)
    with pytest.raises(OracleError, match="does not reach"):
        released_crossing_velocity(1.0, 2.0 * np.sqrt(2.0))


def test_crossing_velocity_errors():
    with pytest.raises(OracleError):
        crossing_velocity(1.0)
    with pytest.raises(OracleError):
        crossing_velocity(1.0, x_initial=3.0, n_bar=4.0)
    with pytest.raises(OracleError, match="does not reach"):
        crossing_velocity(1.0, x_initial=0.5)
    with pytest.raises(OracleError, match="does not reach"):
        crossing_velocity(2.0, n_bar=0.5)


def test_time_scales_of_polynomial_spectra():
    linear = time_scales(lambda n: 2.0 * n, 10)
    assert linear.classical == pytest.approx(np.pi)
    assert math.isinf(linear.revival) and math.isinf(linear.super_revival)

    quadratic = time_scales(lambda n: 0.3 * n ** 2, 10)
    assert quadratic.classical == pytest.approx(2 * np.pi / (2 * 0.3 * 10))
    assert quadratic.revival == pytest.approx(np.pi / 0.3)
    assert math.isinf(quadratic.super_revival)

    cubic = time_scales(lambda n: n ** 3, 10)
    assert cubic.super_revival == pytest.approx(2 * np.pi / 6)


def test_time_scales_of_square_root_spectrum():
    scales = time_scales(np.sqrt, 50)
    assert scales.classical == pytest.approx(2 * np.pi * 2 * np.sqrt(50), rel=1e-3)
    assert scales.revival == pytest.approx(2 * np.pi * 4 * 50 ** 1.5, rel=1e-3)


def test_time_scales_stencil_guard():
    with pytest.raises(OracleError):
        time_scales(lambda n: n, 2)


def test_jc_revival_time():
    revival = jc_revival_time(49, 5.0, 0.15)
    assert revival == pytest.approx(631.5, rel=2e-3)

    # the revival is the classical period of the 2 Omega_n spectrum
    ladder = time_scales(lambda n: 2.0 * rabi_frequency(n, 5.0, 0.15), 49)
    assert revival == pytest.approx(ladder.classical, rel=5e-3)

    assert math.isinf(jc_revival_time(10, 1.0, 0.0))
    assert jc_revival_time(10_000, 1.0, 1.0) == pytest.approx(2 * np.pi * 100.0, rel=1e-4)

    with pytest.raises(OracleError):
        jc_revival_time(0.5, 1.0, 1.0)


def test_exact_inversion_collapses_and_revives():
    coefficients = coherent_coefficients(7.0)
    collapsed = jc_inversion_exact(coefficients, [1.0, 0.0], 5.0, 0.15, np.arange(250.0, 350.0, 0.05))
    revived = jc_inversion_exact(coefficients, [1.0, 0.0], 5.0, 0.15, np.arange(610.0, 650.0, 0.05))

    assert np.ptp(revived) > 5 * np.ptp(collapsed)
