"""
Dicke Model Module
Collective adiabatic potentials, critical coupling, Holstein-Primakoff
expansion and normal modes of the resulting quadratic boson Hamiltonian
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize

from src.errors import DynamicalInstabilityError, HamiltonianError

logger = logging.getLogger(__name__)

# coefficient c of g0^2 x^2 / N under the square root of the ladder
LADDER_CONVENTIONS = {"consistent": 2.0, "printed": 1.0}

# negative frequency squares this close to zero (relative) are round-off
ROUND_OFF_FLOOR = 1e-10


def _validate(n_atoms: int, omega: float, g0: float):
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise HamiltonianError(f"n_atoms must be a positive integer, got {n_atoms}")
    if not (np.isfinite(omega) and omega > 0):
        raise HamiltonianError(f"Omega must be positive, got {omega}")
    if not (np.isfinite(g0) and g0 >= 0):
        raise HamiltonianError(f"g0 must be non-negative, got {g0}")


def _ladder_coefficient(convention: str) -> float:
    try:
        return LADDER_CONVENTIONS[convention]
    except KeyError:
        raise HamiltonianError(
            f"Unknown coupling convention '{convention}', expected {tuple(LADDER_CONVENTIONS)}"
        )


def ladder_labels(n_atoms: int) -> np.ndarray:
    """Eigenvalues m = -N, -N+2, ..., N of the collective sum of sigma operators"""
    return np.arange(-n_atoms, n_atoms + 1, 2)


def dicke_adiabatic_potentials(
    x,
    n_atoms: int,
    omega: float,
    g0: float,
    convention: str = "consistent",
) -> Dict[int, np.ndarray]:
    """
    V_m(x) = x^2/2 + m sqrt(Omega^2/4 + c g0^2 x^2 / N)

    Args:
        x: Positions
        n_atoms: Number of atoms N
        omega: Atomic frequency
        g0: Collective coupling
        convention: "consistent" (c = 2, N = 1 gives the Rabi curves) or "printed" (c = 1)

    Returns:
        Mapping m -> potential values
    """
    if int(n_atoms) != n_atoms or n_atoms < 1:
        raise HamiltonianError(f"n_atoms must be a positive integer, got {n_atoms}")
    coefficient = _ladder_coefficient(convention)
    x = np.asarray(x, dtype=float)
    root = np.sqrt(0.25 * omega ** 2 + coefficient * g0 ** 2 * x ** 2 / n_atoms)
    return {int(m): 0.5 * x ** 2 + m * root for m in ladder_labels(int(n_atoms))}


def dicke_potential_curves(
    x,
    n_atoms: int,
    omega: float,
    g0: float,
    convention: str = "consistent",
) -> pd.DataFrame:
    """Ladder as a table with one V_m column per label"""
    x = np.asarray(x, dtype=float)
    curves = pd.DataFrame({"x": x})
    for m, values in dicke_adiabatic_potentials(x, n_atoms, omega, g0, convention).items():
        curves[f"V_m{m:+d}"] = values
    return curves


def critical_coupling(omega: float) -> float:
    """g0^(c) = sqrt(Omega)/2"""
    if omega < 0:
        raise HamiltonianError(f"Omega must be non-negative, got {omega}")
    return 0.5 * math.sqrt(omega)


def dicke_curvature_at_origin(
    n_atoms: int,
    omega: float,
    g0: float,
    convention: str = "consistent",
) -> float:
    """
    Second derivative of the lowest ladder curve at x = 0: 1 - 2 c g0^2 / Omega

    Negative curvature means a double-well lowest potential. In the
    consistent convention it changes sign exactly at g0^(c).
    """
    _validate(n_atoms, omega, g0)
    return 1.0 - 2.0 * _ladder_coefficient(convention) * g0 ** 2 / omega


def hp_parameters(n_atoms: int, omega: float, g0: float) -> Tuple[float, float, float]:
    """
    Holstein-Primakoff expansion point (mu, alpha_s, beta_s)

    mu = 1 up to g0^(c) and (g0^(c)/g0)^2 beyond;
    alpha_s = g0 sqrt(N (1 - mu^2)), beta_s = sqrt(N (1 - mu)/2).
    """
    _validate(n_atoms, omega, g0)
    g_critical = critical_coupling(omega)
    mu = 1.0 if g0 <= g_critical else (g_critical / g0) ** 2
    alpha_s = g0 * math.sqrt(n_atoms * (1.0 - mu ** 2))
    beta_s = math.sqrt(n_atoms * (1.0 - mu) / 2.0)
    return mu, alpha_s, beta_s


@dataclass(frozen=True)
class QuadraticForm:
    """
    H = omega_c c^dag c + omega_d d^dag d + kappa_dd (d^dag + d)^2
        + kappa_cd (c^dag + c)(d^dag + d)
    """

    omega_c: float
    omega_d: float
    kappa_dd: float
    kappa_cd: float
    mu: float = 1.0
    alpha_s: float = 0.0
    beta_s: float = 0.0

    def quadrature_matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        (A, B) with H = P^T A P / 2 + X^T B X / 2 + const in the quadratures
        X = (b + b^dag)/sqrt 2, P = i (b^dag - b)/sqrt 2
        """
        a_matrix = np.diag([self.omega_c, self.omega_d])
        b_matrix = np.array([
            [self.omega_c, 2.0 * self.kappa_cd],
            [2.0 * self.kappa_cd, self.omega_d + 4.0 * self.kappa_dd],
        ])
        return a_matrix, b_matrix

    def dynamical_matrix(self) -> np.ndarray:
        """d/dt (X, P) = D (X, P) with D = [[0, A], [-B, 0]]"""
        a_matrix, b_matrix = self.quadrature_matrices()
        zeros = np.zeros((2, 2))
        return np.block([[zeros, a_matrix], [-b_matrix, zeros]])


def _quadratic_from_mu(omega: float, g0: float, mu: float, alpha_s: float, beta_s: float) -> QuadraticForm:
    return QuadraticForm(
        omega_c=1.0,
        omega_d=omega * (1.0 + mu) / (2.0 * mu),
        kappa_dd=omega * (1.0 - mu) * (3.0 + mu) / (8.0 * mu * (1.0 + mu)),
        kappa_cd=g0 * mu * math.sqrt(2.0 / (1.0 + mu)),
        mu=mu,
        alpha_s=alpha_s,
        beta_s=beta_s,
    )


def hp_quadratic(n_atoms: int, omega: float, g0: float) -> QuadraticForm:
    """Quadratic boson Hamiltonian about the stable expansion point"""
    mu, alpha_s, beta_s = hp_parameters(n_atoms, omega, g0)
    return _quadratic_from_mu(omega, g0, mu, alpha_s, beta_s)


def normal_phase_quadratic(n_atoms: int, omega: float, g0: float) -> QuadraticForm:
    """The unshifted (mu = 1) form at any coupling; unstable past g0^(c)"""
    _validate(n_atoms, omega, g0)
    return _quadratic_from_mu(omega, g0, 1.0, 0.0, 0.0)


def frequency_squares(q: QuadraticForm) -> np.ndarray:
    """Sorted eigenvalues of -D^2 (each mode once); negative entries mean instability"""
    dynamical = q.dynamical_matrix()
    values = np.linalg.eigvals(-dynamical @ dynamical)
    values = np.sort(values.real)
    # -D^2 = diag(AB, BA) repeats every frequency square
    return values[::2]


def normal_modes(q: QuadraticForm) -> Tuple[float, float]:
    """
    Excitation frequencies (eps_minus, eps_plus) of a quadratic form

    Raises:
        DynamicalInstabilityError: when a frequency square is genuinely negative
    """
    squares = frequency_squares(q)
    scale = max(1.0, float(np.max(np.abs(squares))))
    if squares[0] < -ROUND_OFF_FLOOR * scale:
        raise DynamicalInstabilityError(
            f"Quadratic form is dynamically unstable: eps^2 = {squares[0]:.6g}"
        )
    squares = np.clip(squares, 0.0, None)
    eps_minus, eps_plus = np.sqrt(squares)
    return float(eps_minus), float(eps_plus)


def normal_phase_frequencies(omega: float, g0: float) -> Tuple[float, float]:
    """eps^2 = (1 + Omega^2)/2 -/+ sqrt((1 - Omega^2)^2 + 16 g0^2 Omega)/2"""
    centre = 0.5 * (1.0 + omega ** 2)
    half_gap = 0.5 * math.sqrt((1.0 - omega ** 2) ** 2 + 16.0 * g0 ** 2 * omega)
    lower = centre - half_gap
    if lower < -ROUND_OFF_FLOOR:
        raise DynamicalInstabilityError(f"Normal phase is unstable at g0={g0}")
    return math.sqrt(max(lower, 0.0)), math.sqrt(centre + half_gap)


def soft_mode_coupling(omega: float, n_atoms: int = 1) -> float:
    """Coupling at which the lower normal-phase frequency square crosses zero"""
    g_critical = critical_coupling(omega)
    if g_critical == 0:
        return 0.0

    def lowest_square(g0):
        return frequency_squares(normal_phase_quadratic(n_atoms, omega, g0))[0]

    return optimize.brentq(lowest_square, 0.0, 2.0 * g_critical, xtol=1e-14)


def classical_minimum(n_atoms: int, omega: float, g0: float) -> Tuple[float, float]:
    """
    Minimum of the mean-field energy
    E(alpha, beta) = alpha^2 + Omega (beta^2 - N/2) + 4 g0 alpha beta sqrt(N - beta^2)/sqrt(N)

    Parametrised by beta = sqrt(N) sin(phi), minimised with BFGS from a
    point off the symmetric saddle, then polished by a root solve of the
    gradient.

    Returns:
        (|alpha|, |beta|) at the minimum
    """
    _validate(n_atoms, omega, g0)
    root_n = math.sqrt(n_atoms)

    def energy(v):
        alpha, phi = v
        return (alpha ** 2 + omega * n_atoms * (math.sin(phi) ** 2 - 0.5)
                + 2.0 * g0 * alpha * root_n * math.sin(2.0 * phi))

    def gradient(v):
        alpha, phi = v
        return np.array([
            2.0 * alpha + 2.0 * g0 * root_n * math.sin(2.0 * phi),
            omega * n_atoms * math.sin(2.0 * phi) + 4.0 * g0 * alpha * root_n * math.cos(2.0 * phi),
        ])

    def hessian(v):
        alpha, phi = v
        cross = 4.0 * g0 * root_n * math.cos(2.0 * phi)
        return np.array([
            [2.0, cross],
            [cross, 2.0 * omega * n_atoms * math.cos(2.0 * phi)
             - 8.0 * g0 * alpha * root_n * math.sin(2.0 * phi)],
        ])

    start = np.array([-0.5 * g0 * root_n, 0.4])
    coarse = optimize.minimize(energy, start, jac=gradient, method="BFGS", options={"gtol": 1e-10})
    polished = optimize.root(gradient, coarse.x, jac=hessian, method="hybr", tol=1e-14)
    solution = polished.x if polished.success else coarse.x
    if not polished.success:
        logger.warning(f"Gradient polish did not converge ({polished.message}); keeping BFGS result")

    alpha, phi = solution
    return abs(float(alpha)), abs(root_n * math.sin(phi))


@dataclass(frozen=True)
class DickeGroundState:
    """
    Product state (per-atom lower eigenvector)^(x)N at fixed field position x

    atomic holds the bare (|+>, |->) amplitudes of each atom; spin and m_s
    label the state in the convention where S_z sums the sigma_z of all atoms.
    """

    theta: float
    n_atoms: int
    atomic: np.ndarray
    spin: int
    m_s: int


def dicke_ground_state(
    n_atoms: int,
    omega: float,
    g0: float,
    x: float,
    convention: str = "consistent",
) -> DickeGroundState:
    """
    Collective adiabatic ground state at field position x

    tan(2 theta) = 2 sqrt(c) g0 x / (sqrt(N) Omega) with c the ladder
    coefficient, so N = 1 in the consistent convention gives the Rabi angle.

    The per-atom vector is cos(theta)|g> - sin(theta)|e> with |g> the atomic
    ground state. In the (|+>, |->) order used throughout the package, where
    |+> is excited, that is (-sin theta, cos theta): the lower eigenvector of
    (Omega/2) sigma_z + sqrt(2) g0 x sigma_x for N = 1.
    """
    _validate(n_atoms, omega, g0)
    coefficient = _ladder_coefficient(convention)
    theta = 0.5 * math.atan2(2.0 * math.sqrt(coefficient) * g0 * x, math.sqrt(n_atoms) * omega)
    atomic = np.array([-math.sin(theta), math.cos(theta)])
    return DickeGroundState(
        theta=theta, n_atoms=int(n_atoms), atomic=atomic, spin=int(n_atoms), m_s=-int(n_atoms)
    )


def dicke_spectrum(n_atoms: int, omega: float, couplings: Sequence[float]) -> pd.DataFrame:
    """
    Expansion point and normal-mode frequencies over a coupling scan

    Args:
        n_atoms: Number of atoms
        omega: Atomic frequency
        couplings: g0 values

    Returns:
        DataFrame with columns g0, mu, alpha_s, beta_s, omega_d, kappa_dd,
        kappa_cd, eps_minus, eps_plus
    """
    rows = []
    for g0 in couplings:
        q = hp_quadratic(n_atoms, omega, float(g0))
        eps_minus, eps_plus = normal_modes(q)
        rows.append({
            "g0": float(g0),
            "mu": q.mu,
            "alpha_s": q.alpha_s,
            "beta_s": q.beta_s,
            "omega_d": q.omega_d,
            "kappa_dd": q.kappa_dd,
            "kappa_cd": q.kappa_cd,
            "eps_minus": eps_minus,
            "eps_plus": eps_plus,
        })
    logger.info(f"Dicke spectrum: {len(rows)} couplings, N={n_atoms}, Omega={omega}")
    return pd.DataFrame(rows)
