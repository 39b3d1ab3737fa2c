"""
Model Hamiltonians Module
Potential matrices of the Rabi, Jaynes-Cummings, Lambda and Dicke models in the
conjugate-variable representation, split into position- and momentum-diagonal
blocks, plus the diabatic rotation and the adiabatic diagonalization
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np
import pandas as pd

from src.errors import HamiltonianError, StateError

logger = logging.getLogger(__name__)

MODEL_KINDS = ("Rabi", "JC", "Lambda", "Dicke")
CHANNEL_COUNTS = {"Rabi": 2, "JC": 2, "Lambda": 3}

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# (sigma_x + sigma_z)/sqrt(2): bare (|+>, |->) -> diabatic (|u>, |d>)
DIABATIC_ROTATION = (SIGMA_X + SIGMA_Z) / np.sqrt(2.0)


@dataclass(frozen=True)
class ModelSpec:
    """
    Dimensionless model parameters

    omega = Omega'/omega_field, g0 = g0'/omega_field. lambda1/lambda2 are the
    Lambda-model dipole couplings and n_atoms the Dicke atom count; fields a
    kind does not use are ignored.
    """

    kind: str
    omega: float = 0.0
    g0: float = 0.0
    lambda1: float = 0.0
    lambda2: float = 0.0
    n_atoms: int = 1

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise HamiltonianError(
                f"Unknown model kind '{self.kind}', expected one of {MODEL_KINDS}"
            )
        values = (self.omega, self.g0, self.lambda1, self.lambda2)
        if not all(np.isfinite(v) for v in values):
            raise HamiltonianError(f"Model parameters must be finite: {self}")
        if self.omega < 0 or self.g0 < 0:
            raise HamiltonianError("omega and g0 must be non-negative")
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise HamiltonianError(f"n_atoms must be a positive integer, got {self.n_atoms}")

    @property
    def n_channels(self) -> int:
        if self.kind not in CHANNEL_COUNTS:
            raise HamiltonianError(f"{self.kind} model is not propagated on channels")
        return CHANNEL_COUNTS[self.kind]

    @property
    def lambda0(self) -> float:
        return float(np.hypot(self.lambda1, self.lambda2))

    @property
    def detuning(self) -> float:
        return self.omega - 1.0


@dataclass(frozen=True)
class SplitHamiltonian:
    """
    H = x_block(x) + p_block(p), each a Hermitian channel matrix field

    Both callables accept a scalar (returning a (c, c) matrix) or an array of
    lattice values (returning a (n, c, c) stack). The kinetic p^2/2 and
    harmonic x^2/2 terms are included in the blocks.
    """

    x_block: Callable[[np.ndarray], np.ndarray]
    p_block: Callable[[np.ndarray], np.ndarray]
    n_channels: int
    basis_tag: str = "bare"
    label: str = ""


def _matrix_field(values, builder: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Evaluate builder on a 1-D array and drop the stack axis for scalar input"""
    values = np.asarray(values, dtype=float)
    matrices = builder(np.atleast_1d(values))
    return matrices[0] if values.ndim == 0 else matrices


def _harmonic(values: np.ndarray, n_channels: int) -> np.ndarray:
    return 0.5 * values[:, None, None] ** 2 * np.eye(n_channels, dtype=complex)


def _require(spec: ModelSpec, kind: str):
    if spec.kind != kind:
        raise HamiltonianError(f"Expected a {kind} model, got {spec.kind}")


def is_hermitian(matrices: np.ndarray, tolerance: float = 1e-14) -> bool:
    """True when every matrix of a stack equals its conjugate transpose"""
    matrices = np.asarray(matrices)
    deviation = matrices - np.conj(np.swapaxes(matrices, -1, -2))
    return bool(np.max(np.abs(deviation), initial=0.0) <= tolerance)


# ---------------------------------------------------------------------------
# Two-level models
# ---------------------------------------------------------------------------

def rabi_split(spec: ModelSpec) -> SplitHamiltonian:
    """
    Rabi model: x_block = x^2/2 + (Omega/2) sigma_z + sqrt(2) g0 x sigma_x,
    p_block = p^2/2
    """
    _require(spec, "Rabi")
    coupling = np.sqrt(2.0) * spec.g0

    def x_block(x):
        return _matrix_field(x, lambda v: _harmonic(v, 2)
                             + 0.5 * spec.omega * SIGMA_Z
                             + coupling * v[:, None, None] * SIGMA_X)

    def p_block(p):
        return _matrix_field(p, lambda v: _harmonic(v, 2))

    return SplitHamiltonian(x_block, p_block, n_channels=2, label="Rabi")


def jc_split(spec: ModelSpec) -> SplitHamiltonian:
    """
    Jaynes-Cummings model with the coupling (g0/sqrt 2)(x sigma_x - p sigma_y)
    split between the two blocks; the top-right entry of the sum is
    (g0/sqrt 2)(x + i p).
    """
    _require(spec, "JC")
    coupling = spec.g0 / np.sqrt(2.0)

    def x_block(x):
        return _matrix_field(x, lambda v: _harmonic(v, 2)
                             + 0.5 * spec.omega * SIGMA_Z
                             + coupling * v[:, None, None] * SIGMA_X)

    def p_block(p):
        return _matrix_field(p, lambda v: _harmonic(v, 2)
                             - coupling * v[:, None, None] * SIGMA_Y)

    return SplitHamiltonian(x_block, p_block, n_channels=2, label="JC")


def diabatic_potentials(spec: ModelSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    """V_d^(+/-)(x) = V_h(x +/- sqrt(2) g0) with V_h(x) = x^2/2"""
    x = np.asarray(x, dtype=float)
    shift = np.sqrt(2.0) * spec.g0
    return 0.5 * (x + shift) ** 2, 0.5 * (x - shift) ** 2


def rotated_rabi_potential(spec: ModelSpec, x, include_shift: bool = True) -> np.ndarray:
    """
    Rabi potential matrix in the diabatic basis |u>, |d>

    Diagonals V_h(x + sqrt 2 g0) - g0^2 and V_h(x - sqrt 2 g0) - g0^2, constant
    off-diagonal Omega/2. With include_shift the matrix equals
    U x_block(x) U^dagger exactly for U = DIABATIC_ROTATION.
    """
    _require(spec, "Rabi")
    offset = spec.g0 ** 2 if include_shift else 0.0

    def builder(v):
        v_up, v_down = diabatic_potentials(spec, v)
        matrices = np.zeros((v.size, 2, 2), dtype=complex)
        matrices[:, 0, 0] = v_up - offset
        matrices[:, 1, 1] = v_down - offset
        matrices[:, 0, 1] = matrices[:, 1, 0] = 0.5 * spec.omega
        return matrices

    return _matrix_field(x, builder)


def rotated_rabi_split(spec: ModelSpec) -> SplitHamiltonian:
    """Rabi model in the diabatic basis: two displaced oscillators coupled by Omega/2"""
    _require(spec, "Rabi")

    def p_block(p):
        return _matrix_field(p, lambda v: _harmonic(v, 2))

    return SplitHamiltonian(
        lambda x: rotated_rabi_potential(spec, x),
        p_block,
        n_channels=2,
        basis_tag="rotated",
        label="Rabi",
    )


def rotated_jc_split(spec: ModelSpec) -> SplitHamiltonian:
    """
    JC model in the diabatic basis

    Diagonals V_h(x +/- g0/sqrt 2) - g0^2/4, off-diagonals Omega/2 -/+ i (g0/sqrt 2) p;
    the p-dependent part sits in the momentum block.
    """
    _require(spec, "JC")
    coupling = spec.g0 / np.sqrt(2.0)

    def x_block(x):
        def builder(v):
            matrices = np.zeros((v.size, 2, 2), dtype=complex)
            matrices[:, 0, 0] = 0.5 * (v + coupling) ** 2
            matrices[:, 1, 1] = 0.5 * (v - coupling) ** 2
            matrices[:, 0, 1] = matrices[:, 1, 0] = 0.5 * spec.omega
            return matrices - 0.25 * spec.g0 ** 2 * IDENTITY_2
        return _matrix_field(x, builder)

    def p_block(p):
        return _matrix_field(p, lambda v: _harmonic(v, 2)
                             + coupling * v[:, None, None] * SIGMA_Y)

    return SplitHamiltonian(x_block, p_block, n_channels=2, basis_tag="rotated", label="JC")


# ---------------------------------------------------------------------------
# Adiabatic diagonalization (Rabi)
# ---------------------------------------------------------------------------

def coupling_magnitude(spec: ModelSpec, x) -> np.ndarray:
    """lambda(x) = sqrt(Omega^2/4 + 2 g0^2 x^2)"""
    x = np.asarray(x, dtype=float)
    return np.sqrt(0.25 * spec.omega ** 2 + 2.0 * spec.g0 ** 2 * x ** 2)


def adiabatic_transform(spec: ModelSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    Mixing angle theta with tan(2 theta) = 2 sqrt(2) g0 x / Omega and the unitary
    U1 = [[cos, -sin], [sin, cos]] whose columns are the adiabatic states
    |up> = cos|+> + sin|->, |down> = -sin|+> + cos|->

    U1^dagger (x_block - x^2/2) U1 = diag(lambda, -lambda). For Omega = 0 the
    angle is sign(x) pi/4 (0 at x = 0).
    """
    _require(spec, "Rabi")
    x = np.asarray(x, dtype=float)
    double_angle = np.arctan2(2.0 * np.sqrt(2.0) * spec.g0 * x, spec.omega)
    if double_angle.ndim == 1 and spec.omega > 0:
        double_angle = np.unwrap(double_angle)
    theta = 0.5 * double_angle

    cos, sin = np.cos(theta), np.sin(theta)
    unitary = np.stack(
        [np.stack([cos, -sin], axis=-1), np.stack([sin, cos], axis=-1)], axis=-2
    ).astype(complex)
    return theta, unitary


def adiabatic_corrections(spec: ModelSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    Non-adiabatic coupling strengths d(theta)/dx and d^2(theta)/dx^2

    d theta   =  sqrt(2) Omega g0 / (Omega^2 + 8 g0^2 x^2)
    d^2 theta = -16 sqrt(2) Omega g0^3 x / (Omega^2 + 8 g0^2 x^2)^2
    """
    _require(spec, "Rabi")
    if spec.omega <= 0:
        raise HamiltonianError(
            "Adiabatic corrections diverge at the crossing for Omega = 0 "
            "(d theta becomes a delta function)"
        )
    x = np.asarray(x, dtype=float)
    denominator = spec.omega ** 2 + 8.0 * spec.g0 ** 2 * x ** 2
    dtheta = np.sqrt(2.0) * spec.omega * spec.g0 / denominator
    d2theta = -16.0 * np.sqrt(2.0) * spec.omega * spec.g0 ** 3 * x / denominator ** 2
    return dtheta, d2theta


def adiabatic_potentials(spec: ModelSpec, x) -> Tuple[np.ndarray, np.ndarray]:
    """V_ad^(+/-)(x) = x^2/2 + (d theta)^2 +/- lambda(x)"""
    dtheta, _ = adiabatic_corrections(spec, x)
    x = np.asarray(x, dtype=float)
    base = 0.5 * x ** 2 + dtheta ** 2
    gap = coupling_magnitude(spec, x)
    return base + gap, base - gap


def to_adiabatic_basis(psi, spec: ModelSpec):
    """Rotate a bare-basis Rabi wave packet pointwise: psi_ad(x) = U1(x)^dagger psi(x)"""
    if psi.basis_tag != "bare" or psi.representation != "position":
        raise StateError("Adiabatic projection needs a bare-basis position-space state")
    theta, _ = adiabatic_transform(spec, psi.grid.x)
    cos, sin = np.cos(theta), np.sin(theta)
    plus, minus = psi.channels
    channels = np.stack([cos * plus + sin * minus, -sin * plus + cos * minus])
    return replace(psi, channels=channels, basis_tag="adiabatic")


# ---------------------------------------------------------------------------
# Three-level Lambda atom
# ---------------------------------------------------------------------------

def lambda_potential(spec: ModelSpec, x) -> np.ndarray:
    """
    Bare-basis (g1, e, g2) potential x^2/2 + [[0, l1 x, 0], [l1 x, Omega, l2 x], [0, l2 x, 0]]
    """
    _require(spec, "Lambda")

    def builder(v):
        matrices = _harmonic(v, 3)
        matrices[:, 1, 1] += spec.omega
        matrices[:, 0, 1] += spec.lambda1 * v
        matrices[:, 1, 0] += spec.lambda1 * v
        matrices[:, 1, 2] += spec.lambda2 * v
        matrices[:, 2, 1] += spec.lambda2 * v
        return matrices

    return _matrix_field(x, builder)


def lambda_split(spec: ModelSpec) -> SplitHamiltonian:
    _require(spec, "Lambda")
    return SplitHamiltonian(
        lambda x: lambda_potential(spec, x),
        lambda p: _matrix_field(p, lambda v: _harmonic(v, 3)),
        n_channels=3,
        label="Lambda",
    )


@dataclass(frozen=True)
class LambdaReduction:
    """
    Constant rotation to (bright, e, dark); the dark channel decouples

    Rows of u3 are the new basis vectors in bare coordinates.
    """

    u3: np.ndarray
    lambda0: float
    omega: float

    def active_block(self, x) -> np.ndarray:
        """x^2/2 + [[0, lambda0 x], [lambda0 x, Omega]]"""
        def builder(v):
            matrices = _harmonic(v, 2)
            matrices[:, 1, 1] += self.omega
            matrices[:, 0, 1] += self.lambda0 * v
            matrices[:, 1, 0] += self.lambda0 * v
            return matrices
        return _matrix_field(x, builder)

    def potential(self, x) -> np.ndarray:
        """Full 3x3 block form U3 V(x) U3^T including the spectator row"""
        def builder(v):
            matrices = _harmonic(v, 3)
            matrices[:, :2, :2] = self.active_block(v)
            return matrices
        return _matrix_field(x, builder)


def lambda_reduce(spec: ModelSpec) -> LambdaReduction:
    """
    U3 = [[l1, 0, l2], [0, l0, 0], [l2, 0, -l1]] / l0 with l0 = sqrt(l1^2 + l2^2)
    """
    _require(spec, "Lambda")
    lambda0 = spec.lambda0
    if lambda0 == 0:
        raise HamiltonianError("lambda1 = lambda2 = 0: no excited-state coupling to reduce")

    l1, l2 = spec.lambda1, spec.lambda2
    u3 = np.array(
        [[l1, 0.0, l2], [0.0, lambda0, 0.0], [l2, 0.0, -l1]]
    ) / lambda0
    return LambdaReduction(u3=u3, lambda0=lambda0, omega=spec.omega)


def reduce_lambda_state(psi, reduction: LambdaReduction):
    """Split a bare (g1, e, g2) state into its active (bright, e) part and the dark spectator"""
    if psi.basis_tag != "bare" or psi.n_channels != 3:
        raise StateError("Lambda reduction needs a bare three-channel state")
    if psi.representation != "position":
        raise StateError("Lambda reduction needs a position-space state")
    rotated = np.tensordot(reduction.u3, psi.channels, axes=1)
    return (
        replace(psi, channels=rotated[:2], basis_tag="reduced"),
        replace(psi, channels=rotated[2:], basis_tag="reduced"),
    )


def restore_lambda_basis(active, spectator, reduction: LambdaReduction):
    """Recombine the active pair and the dark spectator and rotate back with u3^T"""
    if active.n_channels != 2 or spectator.n_channels != 1:
        raise StateError(
            f"Expected 2 active and 1 spectator channels, got {active.n_channels} and {spectator.n_channels}"
        )
    for part in (active, spectator):
        if part.basis_tag != "reduced" or part.representation != "position":
            raise StateError("Both parts must be reduced-basis position-space states")
    if active.grid != spectator.grid:
        raise StateError("Active and spectator parts live on different grids")

    stacked = np.concatenate([active.channels, spectator.channels])
    return replace(active, channels=np.tensordot(reduction.u3.T, stacked, axes=1), basis_tag="bare")


def lambda_reduced_split(spec: ModelSpec) -> SplitHamiltonian:
    """Two-channel (bright, e) problem left after lambda_reduce"""
    reduction = lambda_reduce(spec)
    return SplitHamiltonian(
        reduction.active_block,
        lambda p: _matrix_field(p, lambda v: _harmonic(v, 2)),
        n_channels=2,
        basis_tag="reduced",
        label="Lambda-active",
    )


def spectator_split() -> SplitHamiltonian:
    """The decoupled dark channel: a bare harmonic oscillator"""
    return SplitHamiltonian(
        lambda x: _matrix_field(x, lambda v: _harmonic(v, 1)),
        lambda p: _matrix_field(p, lambda v: _harmonic(v, 1)),
        n_channels=1,
        basis_tag="reduced",
        label="Lambda-dark",
    )


def lambda_adiabatic_potentials(
    spec: ModelSpec,
    x,
    exact: bool = False,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Adiabatic potentials (V_+, V_0, V_-) of the Lambda atom

    V_(+/-) = x^2/2 + (d phi)^2 + Omega/2 +/- sqrt(Omega^2/4 + c x^2), V_0 = x^2/2 + (d phi)^2
    with tan(2 phi) = 2 lambda0 x / Omega. The radicand coefficient c is
    2 lambda2^2 by default. exact=True uses lambda0^2, which reproduces the
    eigenvalues of the 3x3 potential; both agree when lambda1 = lambda2.
    """
    _require(spec, "Lambda")
    if spec.omega <= 0:
        raise HamiltonianError("Lambda adiabatic potentials need Omega > 0")

    x = np.asarray(x, dtype=float)
    lambda0 = spec.lambda0
    dphi = lambda0 * spec.omega / (spec.omega ** 2 + 4.0 * lambda0 ** 2 * x ** 2)
    coefficient = lambda0 ** 2 if exact else 2.0 * spec.lambda2 ** 2

    dark = 0.5 * x ** 2 + dphi ** 2
    root = np.sqrt(0.25 * spec.omega ** 2 + coefficient * x ** 2)
    return dark + 0.5 * spec.omega + root, dark, dark + 0.5 * spec.omega - root


# ---------------------------------------------------------------------------
# Dispatch and curve data
# ---------------------------------------------------------------------------

def build_split(spec: ModelSpec, basis: str = "bare") -> SplitHamiltonian:
    """
    Split Hamiltonian of a model in the requested internal basis

    Args:
        spec: Model definition
        basis: "bare", "rotated" (Rabi/JC diabatic) or "reduced" (Lambda active block)

    Returns:
        SplitHamiltonian ready for propagation
    """
    builders = {
        ("Rabi", "bare"): rabi_split,
        ("Rabi", "rotated"): rotated_rabi_split,
        ("JC", "bare"): jc_split,
        ("JC", "rotated"): rotated_jc_split,
        ("Lambda", "bare"): lambda_split,
        ("Lambda", "reduced"): lambda_reduced_split,
    }
    if spec.kind == "Dicke":
        raise HamiltonianError(
            "The Dicke model is analysed through its Holstein-Primakoff expansion "
            "and is not propagated"
        )
    try:
        builder = builders[(spec.kind, basis)]
    except KeyError:
        raise HamiltonianError(f"No '{basis}' basis available for the {spec.kind} model")
    return builder(spec)


def potential_curves(spec: ModelSpec, x) -> pd.DataFrame:
    """
    Potential families on a line of x values

    Rabi: adiabatic V_ad^(+/-) and diabatic curves on the same energy scale
    (diabatic diagonals include the -g0^2 shift). Lambda: V_+, V_0, V_- with
    the 2 lambda2^2 radicand, plus V_+ and V_- from the exact eigenvalues.
    """
    x = np.asarray(x, dtype=float)
    curves = pd.DataFrame({"x": x})

    if spec.kind == "Rabi":
        v_up, v_down = diabatic_potentials(spec, x)
        curves["V_d_plus"] = v_up - spec.g0 ** 2
        curves["V_d_minus"] = v_down - spec.g0 ** 2
        if spec.omega > 0:
            curves["V_ad_plus"], curves["V_ad_minus"] = adiabatic_potentials(spec, x)
        else:
            logger.warning("Omega = 0: adiabatic curves are undefined, writing diabatic only")
    elif spec.kind == "Lambda":
        (curves["V_plus"], curves["V_zero"],
         curves["V_minus"]) = lambda_adiabatic_potentials(spec, x)
        curves["V_plus_exact"], _, curves["V_minus_exact"] = lambda_adiabatic_potentials(spec, x, exact=True)
    else:
        raise HamiltonianError(f"No potential families defined for the {spec.kind} model here")

    return curves
