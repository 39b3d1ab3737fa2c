"""
Quantum States Module
Fock and coherent field states on the grid, multi-channel wave packets
"""

import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln

import config
from src.errors import StateError
from src.grid import Grid

logger = logging.getLogger(__name__)

BASIS_TAGS = ("bare", "rotated", "adiabatic", "reduced")


@dataclass
class MultiChannelWavefunction:
    """
    Complex amplitude per internal channel per grid point

    channels has shape (n_channels, n_points). In the bare basis channel 0
    is |+> and channel 1 is |->; the Lambda model uses (g1, e, g2).
    """

    channels: np.ndarray
    grid: Grid
    basis_tag: str = "bare"
    representation: str = "position"

    def __post_init__(self):
        self.channels = np.atleast_2d(np.asarray(self.channels, dtype=complex))
        if self.channels.shape[-1] != self.grid.n_points:
            raise StateError(
                f"Channels of length {self.channels.shape[-1]} do not fit "
                f"a grid of {self.grid.n_points} points"
            )
        if self.basis_tag not in BASIS_TAGS:
            raise StateError(f"Unknown basis tag '{self.basis_tag}'")

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    def populations(self) -> np.ndarray:
        return self.grid.integrate(np.abs(self.channels) ** 2)

    def norm(self) -> float:
        return float(np.sum(self.populations()))

    def copy(self) -> "MultiChannelWavefunction":
        return replace(self, channels=self.channels.copy())


def _edge_amplitude(amplitudes: np.ndarray, edge_points: int) -> float:
    edges = np.concatenate(
        [amplitudes[..., :edge_points], amplitudes[..., -edge_points:]], axis=-1
    )
    return float(np.max(np.abs(edges)))


def _check_resolved(amplitudes: np.ndarray, label: str, tolerance: float):
    edge = _edge_amplitude(amplitudes, config.BOUNDARY_EDGE_POINTS)
    if edge > tolerance:
        raise StateError(
            f"{label} is not resolved on the grid: boundary amplitude {edge:.3e} "
            f"exceeds {tolerance:.1e}; enlarge x_max"
        )


def fock_states(n_max: int, grid: Grid) -> np.ndarray:
    """
    Hermite functions psi_0..psi_{n_max} on the grid, shape (n_max + 1, n_points)

    Uses the normalized three-term recurrence
    psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1},
    which never forms raw Hermite polynomials and so does not overflow.
    """
    if n_max < 0:
        raise StateError(f"Fock number must be non-negative, got {n_max}")

    x = grid.x
    states = np.empty((n_max + 1, grid.n_points))
    states[0] = np.pi ** -0.25 * np.exp(-0.5 * x ** 2)
    if n_max >= 1:
        states[1] = np.sqrt(2.0) * x * states[0]
    for n in range(1, n_max):
        states[n + 1] = (
            np.sqrt(2.0 / (n + 1)) * x * states[n]
            - np.sqrt(n / (n + 1)) * states[n - 1]
        )
    return states


def fock_state(
    n: int,
    grid: Grid,
    tolerance: float = config.BOUNDARY_TOLERANCE,
) -> np.ndarray:
    """
    Number state |n> in the position representation

    Args:
        n: Photon number
        grid: Lattice to evaluate on
        tolerance: Largest amplitude allowed at the grid edges

    Returns:
        Complex amplitude array of length n_points
    """
    if int(n) != n or n < 0:
        raise StateError(f"Fock number must be a non-negative integer, got {n}")

    psi = fock_states(int(n), grid)[-1].astype(complex)
    _check_resolved(psi, f"Fock state n={n}", tolerance)
    return psi


def coherent_state(
    nu: complex,
    grid: Grid,
    tolerance: float = config.BOUNDARY_TOLERANCE,
) -> np.ndarray:
    """
    Coherent state |nu> centred at x0 = sqrt(2) Re(nu) with momentum p0 = sqrt(2) Im(nu)

    psi(x) = pi^(-1/4) exp(-(x - x0)^2 / 2 + i p0 (x - x0)); the peak amplitude
    is real and positive.
    """
    nu = complex(nu)
    x0 = np.sqrt(2.0) * nu.real
    p0 = np.sqrt(2.0) * nu.imag
    shifted = grid.x - x0
    psi = np.pi ** -0.25 * np.exp(-0.5 * shifted ** 2 + 1j * p0 * shifted)
    _check_resolved(psi, f"Coherent state nu={nu}", tolerance)
    return psi


def compose_initial(
    field: np.ndarray,
    atomic: Sequence[complex],
    grid: Grid,
    basis_tag: str = "bare",
    n_channels: Optional[int] = None,
) -> MultiChannelWavefunction:
    """
    Product state atomic (x) field

    Args:
        field: Normalized field amplitudes on the grid
        atomic: Unit-norm internal state vector (one entry per channel)
        grid: Lattice the field lives on
        basis_tag: Internal basis the atomic vector is expressed in
        n_channels: Channel count required by the model, if known

    Returns:
        MultiChannelWavefunction with channel_c = atomic_c * field
    """
    atomic = np.asarray(atomic, dtype=complex).ravel()
    if n_channels is not None and atomic.size != n_channels:
        raise StateError(
            f"Atomic vector has {atomic.size} components, model needs {n_channels}"
        )

    atomic_norm = np.linalg.norm(atomic)
    if abs(atomic_norm - 1.0) > config.NORMALIZATION_TOLERANCE:
        raise StateError(f"Atomic vector must have unit norm, got {atomic_norm:.12g}")

    field = np.asarray(field, dtype=complex)
    field_norm = float(grid.integrate(np.abs(field) ** 2))
    if abs(field_norm - 1.0) > config.NORMALIZATION_TOLERANCE:
        raise StateError(f"Field must be normalized, got norm {field_norm:.12g}")

    return MultiChannelWavefunction(
        channels=np.outer(atomic, field),
        grid=grid,
        basis_tag=basis_tag,
    )


def fock_coefficients(n: int) -> np.ndarray:
    """Fock amplitudes of the number state |n>"""
    coefficients = np.zeros(int(n) + 1, dtype=complex)
    coefficients[-1] = 1.0
    return coefficients


def coherent_coefficients(nu: complex, n_max: Optional[int] = None) -> np.ndarray:
    """
    Fock amplitudes <n|nu> = exp(-|nu|^2/2) nu^n / sqrt(n!) for n = 0..n_max

    Evaluated in log space. The default cut n_bar + 10 sqrt(n_bar) + 20
    leaves a Poisson tail below 1e-12 for n_bar <= 100.
    """
    nu = complex(nu)
    n_bar = abs(nu) ** 2
    if n_max is None:
        n_max = int(np.ceil(n_bar + 10.0 * np.sqrt(n_bar) + 20))

    if nu == 0:
        vacuum = np.zeros(n_max + 1, dtype=complex)
        vacuum[0] = 1.0
        return vacuum

    n = np.arange(n_max + 1)
    log_magnitude = -0.5 * n_bar + n * np.log(abs(nu)) - 0.5 * gammaln(n + 1)
    return np.exp(log_magnitude) * np.exp(1j * np.angle(nu) * n)


def project_fock(field: np.ndarray, grid: Grid, n_max: int) -> np.ndarray:
    """Fock amplitudes <n|field> for n = 0..n_max by quadrature on the grid"""
    basis = fock_states(n_max, grid)
    return grid.integrate(basis * np.asarray(field)[np.newaxis, :])


def change_basis(
    psi: MultiChannelWavefunction,
    unitary: np.ndarray,
    basis_tag: str,
) -> MultiChannelWavefunction:
    """
    Apply a constant channel-space unitary: psi'_i(x) = sum_j U_ij psi_j(x)
    """
    unitary = np.asarray(unitary, dtype=complex)
    if unitary.shape != (psi.n_channels, psi.n_channels):
        raise StateError(
            f"Unitary of shape {unitary.shape} does not act on "
            f"{psi.n_channels} channels"
        )
    return replace(psi, channels=unitary @ psi.channels, basis_tag=basis_tag)


def field_mean_photon_number(initial: np.ndarray) -> float:
    """<n> of a list of Fock amplitudes"""
    probabilities = np.abs(np.asarray(initial)) ** 2
    return float(np.sum(np.arange(probabilities.size) * probabilities) / np.sum(probabilities))
