"""Configuration constants for the sequential test engine."""

# Problem instance (example instance used throughout the docs and tests)
MU = 1.0 / 3.0
P = 0.5
C0 = 2.0 / 3.0
C1 = 1.0
C2 = 1.5

# Threshold solver
THRESHOLD_TOL = 1e-12
BRACKET_EPS = 1e-15
MONOTONE_CHECK_POINTS = 2001

# Value functions
LIMIT_EPS = 1e-14  # below this 1-|x| the log products use their limits
KINK_WINDOW = 1e-9
PROPERTY_TOL = 1e-9
PROPERTY_GRID = 2001

# Simulation
DT = 1e-3
M_STOP = 0.9999
T_MAX_STEPS = 10_000  # default t_max = T_MAX_STEPS * dt * ceil(1/mu^2)
SEED = 20190501
SCHEME = "exact_posterior"
CHUNK_STEPS = 4096

# Monte Carlo
N_PATHS = 100_000
ESTIMATOR = "conditioned"
OFFSETS = (-0.1, -0.05, 0.0, 0.05, 0.1)
UNRELIABLE_FRACTION = 1e-3
PATHS_PER_TASK = 256
SWEEP_SIGMAS = 3.0

# Value table defaults
X_MIN = -1.0
X_MAX = 1.0
X_N = 401

# Files and environment
LOGS_DIR = "logs"
CONFIG_ENV_VAR = "SEQTEST_CONFIG"
CSV_FLOAT_FORMAT = "%.17g"
