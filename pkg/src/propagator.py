"""
Propagator Module
Second-order Strang split-operator evolution of multi-channel wave packets
"""

import logging
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

import config
from src.errors import ConfigError, HamiltonianError, StateError
from src.hamiltonians import SplitHamiltonian
from src.observables import (
    DEFAULT_OBSERVERS,
    ObservableSeries,
    SnapshotContext,
    density,
    measure,
)
from src.states import MultiChannelWavefunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PropagationConfig:
    """
    Time stepping parameters (time in units of the inverse field frequency)

    Args:
        dt: Step size
        t_final: Run length; rounded to a whole number of steps
        snapshot_stride: Steps between recorded snapshots; a last snapshot is
            taken at t_final when the stride does not divide the step count
        boundary_tolerance: Largest amplitude allowed at the grid edges
        density_stride: Snapshots between density records (0 disables them)
    """

    dt: float = config.DEFAULT_DT
    t_final: float = 1.0
    snapshot_stride: int = config.DEFAULT_SNAPSHOT_STRIDE
    boundary_tolerance: float = config.BOUNDARY_TOLERANCE
    density_stride: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (np.isfinite(self.t_final) and self.t_final > self.dt):
            raise ConfigError(f"t_final must exceed dt, got t_final={self.t_final}, dt={self.dt}")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ConfigError(f"snapshot_stride must be a positive integer, got {self.snapshot_stride}")
        if self.density_stride < 0:
            raise ConfigError(f"density_stride must be non-negative, got {self.density_stride}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.dt))

    def with_dt(self, dt: float) -> "PropagationConfig":
        """Same run at another step size; the stride is rescaled to keep snapshot times"""
        factor = self.dt / dt
        stride = max(1, int(round(self.snapshot_stride * factor)))
        return replace(self, dt=dt, snapshot_stride=stride)


def expm_channel(matrices: np.ndarray, dt: float) -> np.ndarray:
    """
    exp(-i H dt) for a Hermitian matrix or a stack of them (shape (..., c, c))

    2x2 blocks use the Pauli closed form
    e^(-i a0 dt) [cos(r dt) I - i sin(r dt)/r (H - a0 I)], r = |a|;
    other sizes go through a Hermitian eigendecomposition.
    """
    matrices = np.asarray(matrices, dtype=complex)
    if matrices.ndim < 2 or matrices.shape[-1] != matrices.shape[-2]:
        raise HamiltonianError(f"Expected square channel matrices, got shape {matrices.shape}")

    scale = max(1.0, float(np.max(np.abs(matrices), initial=0.0)))
    asymmetry = np.max(np.abs(matrices - np.conj(np.swapaxes(matrices, -1, -2))), initial=0.0)
    if asymmetry > config.HERMITIAN_TOLERANCE * scale:
        raise HamiltonianError(f"Channel matrix is not Hermitian (deviation {asymmetry:.3e})")

    size = matrices.shape[-1]
    if size == 1:
        return np.exp(-1j * dt * matrices.real)

    if size == 2:
        h00 = matrices[..., 0, 0].real
        h11 = matrices[..., 1, 1].real
        h01 = matrices[..., 0, 1]
        a0 = 0.5 * (h00 + h11)
        az = 0.5 * (h00 - h11)
        r = np.sqrt(az ** 2 + np.abs(h01) ** 2)

        identity = np.eye(2, dtype=complex)
        traceless = matrices - a0[..., None, None] * identity
        cos_term = np.cos(r * dt)[..., None, None] * identity
        # np.sinc(y) = sin(pi y)/(pi y), so dt*sinc(r dt/pi) = sin(r dt)/r with the r -> 0 limit
        sin_term = (dt * np.sinc(r * dt / np.pi))[..., None, None] * traceless
        phase = np.exp(-1j * a0 * dt)[..., None, None]
        return phase * (cos_term - 1j * sin_term)

    eigenvalues, eigenvectors = np.linalg.eigh(matrices)
    phases = np.exp(-1j * dt * eigenvalues)
    return np.einsum("...ij,...j,...kj->...ik", eigenvectors, phases, eigenvectors.conj())


class WavePacketPropagator:
    """
    Strang splitting U_x(dt/2) F^-1 U_p(dt) F U_x(dt/2)

    The pointwise channel exponentials are computed once for a given dt;
    consecutive steps fuse the trailing and leading half position steps into
    one full step.
    """

    def __init__(self, split: SplitHamiltonian, grid, dt: float):
        """
        Args:
            split: Hamiltonian split into position and momentum blocks
            grid: Lattice the wave packets live on
            dt: Time step
        """
        self.split = split
        self.grid = grid
        self.dt = float(dt)

        self.x_matrices = split.x_block(grid.x)
        self.p_matrices = split.p_block(grid.p)

        self.half_x = expm_channel(self.x_matrices, 0.5 * self.dt)
        self.full_x = expm_channel(self.x_matrices, self.dt)
        self.full_p = expm_channel(self.p_matrices, self.dt)

        logger.debug(
            f"Propagator ready: {split.label} ({split.basis_tag}), "
            f"{split.n_channels} channels, dt={self.dt}"
        )

    @staticmethod
    def _apply(unitaries: np.ndarray, channels: np.ndarray) -> np.ndarray:
        return np.einsum("kij,jk->ik", unitaries, channels)

    def _check(self, psi: MultiChannelWavefunction):
        if psi.n_channels != self.split.n_channels:
            raise StateError(
                f"State has {psi.n_channels} channels, Hamiltonian needs {self.split.n_channels}"
            )
        if psi.basis_tag != self.split.basis_tag:
            raise StateError(
                f"State is in the '{psi.basis_tag}' basis, Hamiltonian in '{self.split.basis_tag}'"
            )
        if psi.representation != "position" or psi.grid != self.grid:
            raise StateError("State must be in position space on the propagator's grid")

    def evolve(self, channels: np.ndarray, n_steps: int) -> np.ndarray:
        """Advance raw channel amplitudes by n_steps full Strang steps"""
        if n_steps <= 0:
            return channels
        channels = self._apply(self.half_x, channels)
        for k in range(n_steps):
            channels = self.grid.inverse(self._apply(self.full_p, self.grid.forward(channels)))
            closing = self.half_x if k == n_steps - 1 else self.full_x
            channels = self._apply(closing, channels)
        return channels

    def step(self, psi: MultiChannelWavefunction, n_steps: int = 1) -> MultiChannelWavefunction:
        self._check(psi)
        return replace(psi, channels=self.evolve(psi.channels, n_steps))

    def run(
        self,
        psi0: MultiChannelWavefunction,
        prop_config: PropagationConfig,
        observers: Sequence[str] = DEFAULT_OBSERVERS,
        show_progress: bool = False,
        label: str = "",
        fock_n_max: int = 10,
    ) -> ObservableSeries:
        """
        Propagate and record the named observables every snapshot_stride steps

        A boundary amplitude above the tolerance or a non-finite amplitude
        stops the run; the rows recorded so far are returned with valid=False.

        Args:
            psi0: Initial state on the propagator's grid
            prop_config: Time stepping parameters (its dt must match)
            observers: Names from the observables registry
            show_progress: Display a progress bar over snapshots
            label: Name stored on the returned series
            fock_n_max: Largest photon number for the "fock" observer

        Returns:
            ObservableSeries
        """
        self._check(psi0)
        if not np.isclose(prop_config.dt, self.dt, rtol=1e-12, atol=0.0):
            raise ConfigError(f"Config dt={prop_config.dt} differs from propagator dt={self.dt}")

        context = SnapshotContext(
            x_matrices=self.x_matrices, p_matrices=self.p_matrices, fock_n_max=fock_n_max
        )
        stride = int(prop_config.snapshot_stride)
        n_steps = prop_config.n_steps
        # a trailing partial stride still ends on a snapshot at t_final
        schedule = [0] + [stride] * (n_steps // stride)
        if n_steps % stride:
            schedule.append(n_steps % stride)

        rows: List[dict] = []
        density_rows: List[np.ndarray] = []
        density_times: List[float] = []
        abort_reason: Optional[str] = None

        psi = psi0.copy()
        iterator = enumerate(schedule)
        if show_progress:
            iterator = tqdm(iterator, total=len(schedule), desc=f"Propagating {label or self.split.label}")

        steps_done = 0
        for snapshot, steps in iterator:
            psi.channels = self.evolve(psi.channels, steps)
            steps_done += steps
            t = steps_done * self.dt

            abort_reason = self.health_check(psi, prop_config.boundary_tolerance, t)
            if abort_reason:
                logger.error(abort_reason)
                break

            row = {"t": t}
            row.update(measure(psi, observers, context))
            rows.append(row)

            if prop_config.density_stride and snapshot % prop_config.density_stride == 0:
                density_rows.append(density(psi))
                density_times.append(t)

        series = ObservableSeries(
            frame=pd.DataFrame(rows),
            density=np.array(density_rows) if density_rows else None,
            density_times=np.array(density_times) if density_times else None,
            x=np.asarray(self.grid.x),
            valid=abort_reason is None,
            abort_reason=abort_reason,
            label=label or self.split.label,
        )
        if series.valid:
            logger.info(
                f"Run {series.label} finished: {len(series)} snapshots up to "
                f"t={steps_done * self.dt:.6g}"
            )
        return series

    @staticmethod
    def health_check(psi: MultiChannelWavefunction, tolerance: float, t: float) -> Optional[str]:
        if not np.all(np.isfinite(psi.channels)):
            return f"Non-finite amplitude at t={t:.6g}"
        edges = config.BOUNDARY_EDGE_POINTS
        edge = max(
            float(np.max(np.abs(psi.channels[:, :edges]))),
            float(np.max(np.abs(psi.channels[:, -edges:]))),
        )
        if edge > tolerance:
            return f"Boundary amplitude {edge:.3e} exceeds {tolerance:.1e} at t={t:.6g}"
        return None


def strang_step(
    psi: MultiChannelWavefunction,
    split: SplitHamiltonian,
    dt: float,
) -> MultiChannelWavefunction:
    """One symmetric x/2 - p - x/2 step"""
    return WavePacketPropagator(split, psi.grid, dt).step(psi)


def propagate(
    psi0: MultiChannelWavefunction,
    split: SplitHamiltonian,
    prop_config: PropagationConfig,
    observers: Sequence[str] = DEFAULT_OBSERVERS,
    show_progress: bool = False,
    label: str = "",
) -> ObservableSeries:
    """Build a propagator for prop_config.dt and run it from psi0"""
    propagator = WavePacketPropagator(split, psi0.grid, prop_config.dt)
    return propagator.run(psi0, prop_config, observers, show_progress=show_progress, label=label)
