"""
Observables Module
Measurements on multi-channel wave packets and collapse-revival post-processing
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

import config
from src.errors import StateError
from src.hamiltonians import DIABATIC_ROTATION, ModelSpec, to_adiabatic_basis
from src.states import MultiChannelWavefunction, change_basis, project_fock

logger = logging.getLogger(__name__)

CHANNEL_LABELS = {
    ("bare", 1): ("0",),
    ("bare", 2): ("plus", "minus"),
    ("bare", 3): ("g1", "e", "g2"),
    ("rotated", 2): ("u", "d"),
    ("adiabatic", 2): ("up", "down"),
    ("reduced", 1): ("dark",),
    ("reduced", 2): ("bright", "e"),
}

DEFAULT_OBSERVERS = ("norm", "inversion", "centroids", "energy", "excitations")


def channel_labels(basis_tag: str, n_channels: int) -> Tuple[str, ...]:
    """Column suffixes for per-channel quantities"""
    return CHANNEL_LABELS.get(
        (basis_tag, n_channels), tuple(str(c) for c in range(n_channels))
    )


@dataclass
class ObservableSeries:
    """
    Snapshot table of a propagation run

    frame holds one row per snapshot (column t first); undefined centroids
    are NaN. density is an optional (n_density, n_points) array sampled at
    density_times. valid=False marks a run that was aborted; the rows up to
    the abort are kept.
    """

    frame: pd.DataFrame
    density: Optional[np.ndarray] = None
    density_times: Optional[np.ndarray] = None
    x: Optional[np.ndarray] = None
    valid: bool = True
    abort_reason: Optional[str] = None
    label: str = ""

    @property
    def times(self) -> np.ndarray:
        return self.frame["t"].to_numpy()

    def __len__(self) -> int:
        return len(self.frame)

    def __getitem__(self, column: str) -> pd.Series:
        return self.frame[column]


@dataclass
class SnapshotContext:
    """Precomputed data the observers share across snapshots of one run"""

    x_matrices: Optional[np.ndarray] = None
    p_matrices: Optional[np.ndarray] = None
    fock_n_max: int = 10
    extras: Dict = field(default_factory=dict)


def _require_position(psi: MultiChannelWavefunction):
    if psi.representation != "position":
        raise StateError("Measurement needs a position-space wavefunction")


def _as_bare(psi: MultiChannelWavefunction) -> MultiChannelWavefunction:
    """Undo the constant diabatic rotation; bare states pass through"""
    if psi.basis_tag == "rotated":
        return change_basis(psi, DIABATIC_ROTATION.conj().T, "bare")
    return psi


# ---------------------------------------------------------------------------
# Single-state measurements
# ---------------------------------------------------------------------------

def inversion(psi: MultiChannelWavefunction) -> float:
    """
    Atomic inversion <sigma_z> = P_plus - P_minus

    Args:
        psi: Two-channel state in the bare basis

    Returns:
        Inversion in [-1, 1]
    """
    if psi.basis_tag != "bare" or psi.n_channels != 2:
        raise StateError(
            f"Inversion needs a bare two-channel state, got basis '{psi.basis_tag}' "
            f"with {psi.n_channels} channels"
        )
    populations = psi.populations()
    return float(populations[0] - populations[1])


def expectation(psi: MultiChannelWavefunction, operator: np.ndarray) -> float:
    """<psi| O |psi> for a constant channel-space Hermitian operator"""
    operator = np.asarray(operator, dtype=complex)
    if operator.shape != (psi.n_channels, psi.n_channels):
        raise StateError(f"Operator shape {operator.shape} does not match the state")
    value = np.einsum("ik,ij,jk->", psi.channels.conj(), operator, psi.channels)
    return float(np.real(value) * psi.grid.dx)


def channel_centroids(psi: MultiChannelWavefunction) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Channel-conditioned mean position and momentum

    Momentum centroids are measured on the unitary FFT of each channel. A
    channel with population below CENTROID_POPULATION_FLOOR gets NaN.

    Returns:
        (x_centroids, p_centroids, populations), one entry per channel
    """
    _require_position(psi)
    grid = psi.grid
    position_density = np.abs(psi.channels) ** 2
    momentum_density = np.abs(grid.forward(psi.channels)) ** 2

    populations = grid.integrate(position_density)
    x_moment = grid.integrate(position_density * grid.x)
    p_moment = grid.integrate(momentum_density * grid.p)

    resolved = populations >= config.CENTROID_POPULATION_FLOOR
    safe = np.where(resolved, populations, 1.0)
    x_centroids = np.where(resolved, x_moment / safe, np.nan)
    p_centroids = np.where(resolved, p_moment / safe, np.nan)
    return x_centroids, p_centroids, populations


def density(psi: MultiChannelWavefunction) -> np.ndarray:
    """P(x) = sum_c |psi_c(x)|^2"""
    _require_position(psi)
    return np.sum(np.abs(psi.channels) ** 2, axis=0)


def packet_width(psi: MultiChannelWavefunction) -> float:
    """Position standard deviation of the total density"""
    weights = density(psi)
    total = psi.grid.integrate(weights)
    mean = psi.grid.integrate(weights * psi.grid.x) / total
    variance = psi.grid.integrate(weights * (psi.grid.x - mean) ** 2) / total
    return float(np.sqrt(variance))


def energy(
    psi: MultiChannelWavefunction,
    split,
    x_matrices: Optional[np.ndarray] = None,
    p_matrices: Optional[np.ndarray] = None,
) -> float:
    """
    <H> = <x_block> + <p_block>, the second term measured in momentum space

    x_matrices/p_matrices may be passed in when the blocks are already
    evaluated on the lattice.
    """
    _require_position(psi)
    grid = psi.grid
    if x_matrices is None:
        x_matrices = split.x_block(grid.x)
    if p_matrices is None:
        p_matrices = split.p_block(grid.p)

    momentum = grid.forward(psi.channels)
    position_part = np.einsum("ik,kij,jk->", psi.channels.conj(), x_matrices, psi.channels)
    momentum_part = np.einsum("ik,kij,jk->", momentum.conj(), p_matrices, momentum)
    return float(np.real(position_part + momentum_part) * grid.dx)


def excitation_number(psi: MultiChannelWavefunction) -> float:
    """
    <a^dagger a + sigma_z / 2> of a two-channel state in the bare or diabatic basis

    a^dagger a = (x^2 + p^2 - 1)/2 summed over channels.
    """
    _require_position(psi)
    bare = _as_bare(psi)
    grid = bare.grid
    position_density = np.sum(np.abs(bare.channels) ** 2, axis=0)
    momentum_density = np.sum(np.abs(grid.forward(bare.channels)) ** 2, axis=0)

    x_squared = grid.integrate(position_density * grid.x ** 2)
    p_squared = grid.integrate(momentum_density * grid.p ** 2)
    photons = 0.5 * (x_squared + p_squared - bare.norm())
    return float(photons + 0.5 * inversion(bare))


def fock_populations(psi: MultiChannelWavefunction, n_max: int) -> np.ndarray:
    """Probability of each photon number 0..n_max, summed over channels"""
    _require_position(psi)
    probabilities = np.zeros(n_max + 1)
    for channel in psi.channels:
        probabilities += np.abs(project_fock(channel, psi.grid, n_max)) ** 2
    return probabilities


def adiabatic_populations(
    psi: MultiChannelWavefunction,
    spec: ModelSpec,
    region: str = "all",
) -> Tuple[float, float]:
    """
    Populations of the upper and lower Rabi adiabatic states

    Args:
        psi: Bare-basis Rabi state
        spec: Rabi model (defines the mixing angle)
        region: "all", "negative" (x < 0) or "positive" (x > 0)

    Returns:
        (upper, lower) populations on the chosen half-line
    """
    _require_position(psi)
    masks = {
        "all": np.ones(psi.grid.n_points, dtype=bool),
        "negative": psi.grid.x < 0,
        "positive": psi.grid.x > 0,
    }
    if region not in masks:
        raise StateError(f"Unknown region '{region}', expected one of {tuple(masks)}")

    rotated = to_adiabatic_basis(_as_bare(psi), spec)
    weights = np.abs(rotated.channels) ** 2 * masks[region]
    upper, lower = psi.grid.integrate(weights)
    return float(upper), float(lower)


# ---------------------------------------------------------------------------
# Observer registry used by the propagator
# ---------------------------------------------------------------------------

def _observe_norm(psi, context):
    return {"norm": psi.norm()}


def _observe_inversion(psi, context):
    if psi.n_channels != 2 or psi.basis_tag not in ("bare", "rotated"):
        return {}
    return {"inversion": inversion(_as_bare(psi))}


def _observe_centroids(psi, context):
    labels = channel_labels(psi.basis_tag, psi.n_channels)
    x_centroids, p_centroids, populations = channel_centroids(psi)

    columns = {}
    for label, pop, x_c, p_c in zip(labels, populations, x_centroids, p_centroids):
        columns[f"pop_{label}"] = pop
        columns[f"x_{label}"] = x_c
        columns[f"p_{label}"] = p_c
    if psi.n_channels >= 2:
        columns["dx"] = x_centroids[0] - x_centroids[1]
        columns["dp"] = p_centroids[0] - p_centroids[1]
    return columns


def _observe_energy(psi, context):
    if context.x_matrices is None or context.p_matrices is None:
        return {}
    return {"energy": energy(psi, None, context.x_matrices, context.p_matrices)}


def _observe_excitations(psi, context):
    if psi.n_channels != 2 or psi.basis_tag not in ("bare", "rotated"):
        return {}
    return {"n_exc": excitation_number(psi)}


def _observe_fock(psi, context):
    probabilities = fock_populations(psi, context.fock_n_max)
    return {f"fock_{n}": value for n, value in enumerate(probabilities)}


OBSERVERS = {
    "norm": _observe_norm,
    "inversion": _observe_inversion,
    "centroids": _observe_centroids,
    "energy": _observe_energy,
    "excitations": _observe_excitations,
    "fock": _observe_fock,
}


def measure(
    psi: MultiChannelWavefunction,
    names: Sequence[str],
    context: Optional[SnapshotContext] = None,
) -> Dict[str, float]:
    """Evaluate the named observers on one snapshot"""
    context = context or SnapshotContext()
    row = {}
    for name in names:
        try:
            observer = OBSERVERS[name]
        except KeyError:
            raise StateError(f"Unknown observable '{name}', available: {sorted(OBSERVERS)}")
        row.update(observer(psi, context))
    return row


# ---------------------------------------------------------------------------
# Series post-processing
# ---------------------------------------------------------------------------

def _series_frame(series) -> pd.DataFrame:
    return series.frame if isinstance(series, ObservableSeries) else series


def inversion_envelope(series, window: int = config.DEFAULT_ENVELOPE_WINDOW) -> pd.Series:
    """
    Centred sliding (max - min) of the inversion

    Args:
        series: ObservableSeries or DataFrame with an inversion column
        window: Window length in snapshots

    Returns:
        Envelope amplitude per snapshot
    """
    frame = _series_frame(series)
    if window < 1:
        raise StateError(f"Envelope window must be positive, got {window}")
    if len(frame) < window:
        raise StateError(f"Series of {len(frame)} snapshots is shorter than the window {window}")

    rolling = frame["inversion"].rolling(window, center=True, min_periods=1)
    return (rolling.max() - rolling.min()).rename("envelope")


def detect_revivals(
    series,
    x_tol: float,
    p_tol: float,
    envelope_window: int = config.DEFAULT_ENVELOPE_WINDOW,
) -> pd.DataFrame:
    """
    Times at which the two channel packets coincide in phase space

    A snapshot qualifies when |dx| <= x_tol and |dp| <= p_tol. A separation
    left undefined because one channel is empty counts as coincident. Each
    contiguous run of qualifying snapshots becomes one event, reported at
    the minimum of sqrt(dx^2 + dp^2).

    Returns:
        DataFrame with columns t, t_start, t_end, dx, dp, separation, envelope
    """
    frame = _series_frame(series)
    columns = ["t", "t_start", "t_end", "dx", "dp", "separation", "envelope"]
    if len(frame) < envelope_window:
        raise StateError(
            f"Series of {len(frame)} snapshots is shorter than the window {envelope_window}"
        )

    dx, dp = frame["dx"], frame["dp"]
    single_packet = dx.isna() & dp.isna()
    qualifies = single_packet | ((dx.abs() <= x_tol) & (dp.abs() <= p_tol))
    separation = np.hypot(dx, dp).fillna(0.0)

    if "inversion" in frame:
        envelope = inversion_envelope(frame, envelope_window)
    else:
        envelope = pd.Series(np.nan, index=frame.index)

    run_id = (qualifies != qualifies.shift()).cumsum()
    events: List[Dict] = []
    for _, members in separation[qualifies].groupby(run_id[qualifies]):
        best = members.idxmin()
        events.append({
            "t": frame.at[best, "t"],
            "t_start": frame.at[members.index[0], "t"],
            "t_end": frame.at[members.index[-1], "t"],
            "dx": dx.at[best],
            "dp": dp.at[best],
            "separation": separation.at[best],
            "envelope": envelope.at[best],
        })

    logger.debug(f"Revival scan found {len(events)} events")
    return pd.DataFrame(events, columns=columns)


def default_revival_tolerance(psi: MultiChannelWavefunction) -> float:
    """REVIVAL_TOLERANCE_FACTOR times the initial packet width"""
    return config.REVIVAL_TOLERANCE_FACTOR * packet_width(psi)
