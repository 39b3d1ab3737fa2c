"""
Grid Module
Position/momentum lattice and the unitary spectral transform between them
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sfft

from src.errors import GridError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Grid:
    """
    Uniform periodic lattice x_j = -x_max + j*dx, j = 0..n_points-1

    The momentum lattice uses the standard FFT ordering: p_k = 2*pi*k/(n*dx)
    for k = 0..n/2-1 followed by the negative frequencies.
    """

    n_points: int
    x_max: float
    x: np.ndarray = field(init=False, repr=False, compare=False)
    p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        x = -self.x_max + self.dx * np.arange(self.n_points)
        p = 2.0 * np.pi * sfft.fftfreq(self.n_points, d=self.dx)
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def dx(self) -> float:
        return 2.0 * self.x_max / self.n_points

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / (self.n_points * self.dx)

    @property
    def p_max(self) -> float:
        """Largest representable momentum magnitude (Nyquist)"""
        return np.pi / self.dx

    def forward(self, amplitudes: np.ndarray) -> np.ndarray:
        """Unitary DFT along the last axis (position -> momentum)"""
        self._check_shape(amplitudes)
        return sfft.fft(amplitudes, axis=-1, norm="ortho")

    def inverse(self, amplitudes: np.ndarray) -> np.ndarray:
        """Unitary inverse DFT along the last axis (momentum -> position)"""
        self._check_shape(amplitudes)
        return sfft.ifft(amplitudes, axis=-1, norm="ortho")

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Riemann sum over the lattice (spectrally exact for periodic data)"""
        return np.sum(values, axis=-1) * self.dx

    def _check_shape(self, amplitudes: np.ndarray):
        if np.shape(amplitudes)[-1] != self.n_points:
            raise GridError(
                f"Array with last axis {np.shape(amplitudes)[-1]} does not fit "
                f"a grid of {self.n_points} points"
            )


def make_grid(n_points: int, x_max: float) -> Grid:
    """
    Build a Grid spanning [-x_max, x_max)

    Args:
        n_points: Number of lattice points (>= 2, powers of two are fastest)
        x_max: Half width of the position window

    Returns:
        Immutable Grid
    """
    if int(n_points) != n_points or n_points < 2:
        raise GridError(f"n_points must be an integer >= 2, got {n_points}")
    if not np.isfinite(x_max) or x_max <= 0:
        raise GridError(f"x_max must be positive, got {x_max}")

    n_points = int(n_points)
    if n_points & (n_points - 1):
        logger.warning(f"n_points={n_points} is not a power of two; FFTs will be slower")

    grid = Grid(n_points=n_points, x_max=float(x_max))
    logger.debug(f"Grid built: n={n_points}, dx={grid.dx:.6g}, p_max={grid.p_max:.6g}")
    return grid


def to_momentum(psi):
    """
    Transform every channel of a position-space wavefunction to momentum space

    The discrete norm sum(|psi|^2)*dx is preserved (Parseval).
    """
    if psi.representation != "position":
        raise GridError("Wavefunction is already in the momentum representation")
    return replace(
        psi,
        channels=psi.grid.forward(psi.channels),
        representation="momentum",
    )


def to_position(psi):
    """Inverse of to_momentum"""
    if psi.representation != "momentum":
        raise GridError("Wavefunction is already in the position representation")
    return replace(
        psi,
        channels=psi.grid.inverse(psi.channels),
        representation="position",
    )
