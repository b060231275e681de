# Worst-case deletion probability the alignment analysis is proven for.
WORST_CASE_DELTA = 1 / (3 * 10**6)

# Coarse estimates are good when |b_m - (1-delta) a_m| <= COARSE_TOLERANCE * sqrt(a_m).
COARSE_TOLERANCE = 10.0

# Fine acceptance per run should reach this share of (1-delta)^2, both ones of the gap kept.
ACCEPTANCE_FLOOR = 0.9

# Multiplier on the alignment threshold used by the never-ahead precondition (C_1 = C_0 / 4).
NEVER_AHEAD_FACTOR = 0.25

DEFAULT_C0 = 1.0
DEFAULT_COARSE_REPS = 64
DEFAULT_FINE_TRACES = 100_000
DEFAULT_T_TRACES = 10_000
DEFAULT_MIN_SUCCESS_FRACTION = 0.6
DEFAULT_MAX_ENUMERATION = 20

# Exit codes
EXIT_OK = 0
EXIT_ALGORITHM_FAILURE = 1
EXIT_USAGE = 2

# Environment
THREADS_ENV = "SEPTRACE_THREADS"
LOG_LEVEL_ENV = "SEPTRACE_LOG_LEVEL"
DEFAULT_LOG_LEVEL = "INFO"

# Edit distance is skipped when the strings still differ over more than this many bits
# after their common prefix and suffix are stripped.
EDIT_DISTANCE_MAX_LENGTH = 25_000
