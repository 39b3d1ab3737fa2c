"""
Configuration Settings for the Cavity Wave Packet Engine
"""

# Directories
RESULTS_DIR = "data/runs"
EXPORTS_DIR = "data/exports"
CONFIGS_DIR = "configs"

# Grid
DEFAULT_N_POINTS = 2048
DEFAULT_X_MAX = 20.0

# Propagation
DEFAULT_DT = 5e-4
DEFAULT_SNAPSHOT_STRIDE = 20
BOUNDARY_TOLERANCE = 1e-8
BOUNDARY_EDGE_POINTS = 4  # outermost lattice points checked on each side

# Numerical tolerances
HERMITIAN_TOLERANCE = 1e-12
CENTROID_POPULATION_FLOOR = 1e-12
NORMALIZATION_TOLERANCE = 1e-10
ORACLE_TRUNCATION_TOLERANCE = 1e-12
UNBOUNDED_DERIVATIVE = 1e-13

# Revival detection
REVIVAL_TOLERANCE_FACTOR = 0.1  # x_tol = p_tol = factor * initial packet width
DEFAULT_ENVELOPE_WINDOW = 101

# Landau-Zener sweep
LZ_SNAPSHOT_STRIDE = 10
LZ_MIN_TRANSMISSION = 0.99  # weight on x < 0 needed to call a crossing complete

# Convergence check (dt-halving)
CONVERGENCE_INVERSION_THRESHOLD = 1e-4
CONVERGENCE_NORM_THRESHOLD = 1e-9

# Dicke spectrum
DICKE_SCAN_POINTS = 81
DICKE_RANDOM_DRAWS = 20
DICKE_SEED = 7

# Output
CSV_FLOAT_FORMAT = "%.17g"
DENSITY_STRIDE = 10

# Logging
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
