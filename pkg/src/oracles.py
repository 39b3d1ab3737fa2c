"""
Analytic Oracles Module
Exact Jaynes-Cummings dynamics in the Fock basis, Landau-Zener estimates and
the classical/revival/super-revival time-scale ladder
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

import config
from src.errors import OracleError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]


def rabi_frequency(n: ArrayLike, omega: float, g0: float) -> np.ndarray:
    """Omega_n = sqrt(Delta^2/4 + g0^2 n) with Delta = Omega - 1"""
    detuning = omega - 1.0
    return np.sqrt(0.25 * detuning ** 2 + g0 ** 2 * np.asarray(n, dtype=float))


def jc_ground_energy(omega: float) -> float:
    """Energy of the uncoupled ground state |-, 0> including the field zero point"""
    return 0.5 * (1.0 - omega)


@dataclass(frozen=True)
class JCEigenpair:
    """
    Dressed states of excitation sector n in the basis (|+, n-1>, |-, n>)

    E_n^(+/-) = n +/- Omega_n (energies include the field zero point).
    Sector 0 is the singlet |-, 0>, stored with both energies equal to the
    ground energy and theta = 0.
    """

    n: int
    energy_plus: float
    energy_minus: float
    theta: float
    detuning: float

    @property
    def rabi(self) -> float:
        return 0.5 * (self.energy_plus - self.energy_minus)

    @property
    def vectors(self) -> np.ndarray:
        """Columns |n, +> = (cos, sin) and |n, -> = (-sin, cos)"""
        cos, sin = math.cos(self.theta), math.sin(self.theta)
        return np.array([[cos, -sin], [sin, cos]])

    def sector_matrix(self, g0: float) -> np.ndarray:
        """Hamiltonian restricted to the sector"""
        coupling = g0 * math.sqrt(self.n)
        return np.array([
            [self.n + 0.5 * self.detuning, coupling],
            [coupling, self.n - 0.5 * self.detuning],
        ])


def jc_eigensystem(n: int, omega: float, g0: float) -> JCEigenpair:
    """
    Closed-form eigenpair of JC sector n

    Args:
        n: Excitation number (0 gives the singlet)
        omega: Atomic frequency
        g0: Coupling

    Returns:
        JCEigenpair with tan(2 theta) = 2 g0 sqrt(n) / Delta
    """
    if int(n) != n or n < 0:
        raise OracleError(f"Sector index must be a non-negative integer, got {n}")
    n = int(n)
    detuning = omega - 1.0

    if n == 0:
        ground = jc_ground_energy(omega)
        return JCEigenpair(n=0, energy_plus=ground, energy_minus=ground, theta=0.0, detuning=detuning)

    rabi = float(rabi_frequency(n, omega, g0))
    theta = 0.5 * math.atan2(2.0 * g0 * math.sqrt(n), detuning)
    return JCEigenpair(
        n=n,
        energy_plus=n + rabi,
        energy_minus=n - rabi,
        theta=theta,
        detuning=detuning,
    )


def jc_inversion_exact(
    field_coefficients: Sequence[complex],
    atomic: Sequence[complex],
    omega: float,
    g0: float,
    t: ArrayLike,
) -> Union[float, np.ndarray]:
    """
    Exact JC inversion of (a|+> + b|->) (x) sum_n c_n |n>

    Each sector k couples |+, k-1> and |-, k>; its 2x2 block evolves in
    closed form and the inversion is the population difference summed over
    sectors, minus the singlet weight |b c_0|^2.

    Args:
        field_coefficients: Fock amplitudes c_0..c_nmax (must carry the full norm)
        atomic: (a, b) bare atomic amplitudes
        omega: Atomic frequency
        g0: Coupling
        t: Time or array of times

    Returns:
        Inversion with the shape of t
    """
    coefficients = np.asarray(field_coefficients, dtype=complex)
    atomic = np.asarray(atomic, dtype=complex).ravel()
    if atomic.size != 2:
        raise OracleError(f"Atomic vector must have two components, got {atomic.size}")
    if abs(np.linalg.norm(atomic) - 1.0) > config.NORMALIZATION_TOLERANCE:
        raise OracleError("Atomic vector must have unit norm")

    missing = abs(1.0 - float(np.sum(np.abs(coefficients) ** 2)))
    if missing > config.ORACLE_TRUNCATION_TOLERANCE:
        raise OracleError(
            f"Fock expansion misses probability {missing:.3e}; truncation too aggressive"
        )

    a, b = atomic
    # sector k = 1..n_max+1 holds (a c_{k-1}, b c_k)
    padded = np.append(coefficients, 0.0)
    upper = a * padded[:-1]
    lower = b * padded[1:]
    k = np.arange(1, coefficients.size + 1)

    detuning = omega - 1.0
    rabi = rabi_frequency(k, omega, g0)
    coupling = g0 * np.sqrt(k)

    times = np.asarray(t, dtype=float)
    tt = np.atleast_1d(times)[:, None]
    cos = np.cos(rabi * tt)
    # sin(Omega_k t)/Omega_k, finite when Omega_k = 0
    sin_over = tt * np.sinc(rabi * tt / np.pi)

    # [cos - i sin/Omega_k (M - k)] applied to (upper, lower)
    upper_t = cos * upper - 1j * sin_over * (0.5 * detuning * upper + coupling * lower)
    lower_t = cos * lower - 1j * sin_over * (coupling * upper - 0.5 * detuning * lower)

    singlet = abs(b * coefficients[0]) ** 2
    result = np.sum(np.abs(upper_t) ** 2 - np.abs(lower_t) ** 2, axis=1) - singlet
    return float(result[0]) if times.ndim == 0 else result


def landau_zener_probability(omega: float, g0: float, v: float) -> float:
    """
    P_LZ = 1 - exp(-sqrt(2) pi Omega^2 / (8 g0 v))

    Probability of following the adiabatic curve through the crossing:
    0 for Omega = 0 (diabatic passage), approaching 1 as v -> 0.
    """
    if g0 <= 0:
        raise OracleError(f"Landau-Zener estimate needs g0 > 0, got {g0}")
    if not v > 0:
        raise OracleError(f"Crossing velocity must be positive, got {v}")
    exponent = math.sqrt(2.0) * math.pi * omega ** 2 / (8.0 * g0 * v)
    return -math.expm1(-exponent)


def crossing_velocity(
    g0: float,
    x_initial: Optional[float] = None,
    n_bar: Optional[float] = None,
) -> float:
    """
    Packet speed at the diabatic crossing

    v = sqrt(x_i^2 - g0^2/2) for a packet released at x_i, or
    v = sqrt(2 n_bar - g0^2/2) for a coherent state of mean photon number n_bar.
    Exactly one of x_initial, n_bar must be given.
    """
    if (x_initial is None) == (n_bar is None):
        raise OracleError("Give exactly one of x_initial and n_bar")

    if x_initial is not None:
        radicand = x_initial ** 2 - 0.5 * g0 ** 2
        condition = f"|x_i| > g0/sqrt(2) = {g0 / math.sqrt(2.0):.6g}"
    else:
        radicand = 2.0 * n_bar - 0.5 * g0 ** 2
        condition = f"n_bar > g0^2/4 = {0.25 * g0 ** 2:.6g}"

    if not radicand > 0:
        raise OracleError(f"Packet does not reach the crossing; requires {condition}")
    return math.sqrt(radicand)


def released_crossing_velocity(g0: float, x_initial: float) -> float:
    """
    Speed at x = 0 of a packet released at rest from x_initial on the
    diabatic oscillator centred at +sqrt(2) g0

    The diabatic curve (x - sqrt(2) g0)^2/2 - g0^2 vanishes at the crossing, so
    v = sqrt((x_i - sqrt(2) g0)^2 - 2 g0^2). The packet turns at
    2 sqrt(2) g0 - x_i and reaches x = 0 only for x_i > 2 sqrt(2) g0.
    """
    reach = 2.0 * math.sqrt(2.0) * g0
    if not x_initial > reach:
        raise OracleError(
            f"Packet does not reach the crossing; requires x_i > 2 sqrt(2) g0 = {reach:.6g}, "
            f"got {x_initial:.6g}"
        )
    return math.sqrt((x_initial - math.sqrt(2.0) * g0) ** 2 - 2.0 * g0 ** 2)


@dataclass(frozen=True)
class TimeScales:
    """T_k = 2 pi / |E^(k)(n0)|; math.inf marks an unbounded scale"""

    classical: float
    revival: float
    super_revival: float


def _period(derivative: float) -> float:
    if abs(derivative) < config.UNBOUNDED_DERIVATIVE:
        return math.inf
    return 2.0 * math.pi / abs(derivative)


def time_scales(energy: Callable[[int], float], n0: int) -> TimeScales:
    """
    Classical, revival and super-revival times of a spectrum around n0

    Derivatives use centred unit-step differences in n:
    E'   = (E(n+1) - E(n-1)) / 2
    E''  =  E(n+1) - 2 E(n) + E(n-1)
    E''' = (E(n+2) - 2 E(n+1) + 2 E(n-1) - E(n-2)) / 2
    exact for polynomials up to third order.
    """
    if int(n0) != n0 or n0 < 3:
        raise OracleError(f"Stencil needs an integer n0 >= 3, got {n0}")
    n0 = int(n0)

    values = {n: float(energy(n)) for n in range(n0 - 2, n0 + 3)}
    if not all(np.isfinite(list(values.values()))):
        raise OracleError(f"Energy is not finite around n0={n0}")

    first = 0.5 * (values[n0 + 1] - values[n0 - 1])
    second = values[n0 + 1] - 2.0 * values[n0] + values[n0 - 1]
    third = 0.5 * (values[n0 + 2] - 2.0 * values[n0 + 1] + 2.0 * values[n0 - 1] - values[n0 - 2])
    return TimeScales(_period(first), _period(second), _period(third))


def jc_revival_time(n_bar: float, omega: float, g0: float) -> float:
    """
    Revival time pi / (Omega_(n_bar+1) - Omega_n_bar)

    The time after which neighbouring Rabi phases 2 Omega_n t realign;
    math.inf when g0 = 0.
    """
    if n_bar < 1:
        raise OracleError(f"Revival time needs n_bar >= 1, got {n_bar}")
    difference = float(rabi_frequency(n_bar + 1, omega, g0) - rabi_frequency(n_bar, omega, g0))
    if abs(difference) < config.UNBOUNDED_DERIVATIVE:
        return math.inf
    return math.pi / difference
