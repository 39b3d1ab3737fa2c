"""
Cavity Wave Packet Engine - Core Package
"""

from src.dicke import (
    QuadraticForm,
    classical_minimum,
    critical_coupling,
    dicke_adiabatic_potentials,
    dicke_curvature_at_origin,
    dicke_ground_state,
    hp_parameters,
    hp_quadratic,
    normal_modes,
    normal_phase_quadratic,
    soft_mode_coupling,
)
from src.grid import Grid, make_grid, to_momentum, to_position
from src.hamiltonians import (
    ModelSpec,
    SplitHamiltonian,
    build_split,
    lambda_reduce,
    potential_curves,
    reduce_lambda_state,
    restore_lambda_basis,
)
from src.observables import (
    ObservableSeries,
    channel_centroids,
    density,
    detect_revivals,
    energy,
    excitation_number,
    inversion,
)
from src.oracles import (
    JCEigenpair,
    crossing_velocity,
    jc_eigensystem,
    jc_inversion_exact,
    jc_revival_time,
    landau_zener_probability,
    released_crossing_velocity,
    time_scales,
)
from src.propagator import PropagationConfig, WavePacketPropagator, expm_channel, propagate, strang_step
from src.runner import RunConfig, SimulationRunner, load_config, parse_config_text
from src.states import MultiChannelWavefunction, coherent_state, compose_initial, fock_state

__version__ = "1.0.0"
__all__ = [
    "Grid",
    "make_grid",
    "to_momentum",
    "to_position",
    "MultiChannelWavefunction",
    "fock_state",
    "coherent_state",
    "compose_initial",
    "ModelSpec",
    "SplitHamiltonian",
    "build_split",
    "potential_curves",
    "lambda_reduce",
    "reduce_lambda_state",
    "restore_lambda_basis",
    "PropagationConfig",
    "WavePacketPropagator",
    "expm_channel",
    "strang_step",
    "propagate",
    "ObservableSeries",
    "inversion",
    "channel_centroids",
    "density",
    "energy",
    "excitation_number",
    "detect_revivals",
    "JCEigenpair",
    "jc_eigensystem",
    "jc_inversion_exact",
    "landau_zener_probability",
    "crossing_velocity",
    "released_crossing_velocity",
    "time_scales",
    "jc_revival_time",
    "QuadraticForm",
    "dicke_adiabatic_potentials",
    "critical_coupling",
    "hp_parameters",
    "hp_quadratic",
    "normal_phase_quadratic",
    "normal_modes",
    "soft_mode_coupling",
    "classical_minimum",
    "dicke_curvature_at_origin",
    "dicke_ground_state",
    "RunConfig",
    "SimulationRunner",
    "load_config",
    "parse_config_text",
]
