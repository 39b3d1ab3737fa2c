"""
Exception types raised across the package
"""


class WavePacketError(Exception):
    """Base class for all errors raised by the engine"""


class GridError(WavePacketError, ValueError):
    """Invalid lattice parameters or arrays that do not fit the lattice"""


class StateError(WavePacketError, ValueError):
    """Unresolved or malformed states, wrong basis for a measurement"""


class HamiltonianError(WavePacketError, ValueError):
    """Wrong model kind, non-Hermitian input or excluded parameter values"""


class OracleError(WavePacketError, ValueError):
    """Inputs outside the domain of an analytic formula"""


class DynamicalInstabilityError(WavePacketError, ArithmeticError):
    """Quadratic boson form with a negative normal-mode frequency squared"""


class ConfigError(WavePacketError, ValueError):
    """Run configuration could not be parsed or validated"""


class NumericalAbort(WavePacketError, RuntimeError):
    """A propagation run was aborted and its results are invalid"""


class BoundaryLeakError(NumericalAbort):
    """Wave packet amplitude reached the edge of the periodic grid"""
