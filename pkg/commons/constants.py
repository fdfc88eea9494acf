# Version
NEARGROUP_VERSION = "NEARGROUP Version 1.0.0"

# Configuration
default_config_name = "default.conf"
conf_dir_name = "conf"
env_tolerance = "NEARGROUP_TOLERANCE"

SETTING = "SETTING"
SEARCH = "SEARCH"
ARCHIVE = "ARCHIVE"
LIMIT = "LIMIT"

# Exit codes
EXIT_SUCCESS = 0
EXIT_VERIFICATION_FAIL = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE_ERROR = 3

# Numerical defaults (overridden by configuration)
DEFAULT_TOLERANCE = 1e-10
ORACLE_TOLERANCE = 1e-9
RANK_TOLERANCE = 1e-10
PRUNE_THRESHOLD = 1e-14
EQUAL_THRESHOLD = 1e-7
UNEQUAL_THRESHOLD = 1e-3
NEWTON_TOLERANCE = 1e-12
DEFAULT_MAX_GROUP_ORDER = 64
DEFAULT_RANDOM_STARTS = 1000
DEFAULT_GRID_RESOLUTION = 1000
DEFAULT_NEWTON_MAX_ITER = 200
DEFAULT_LSQ_STARTS = 10000
DEFAULT_SEED = 20240613
MAX_CUNTZ_LEVEL = 6
DEFAULT_MAX_ORACLE_TERMS = 2000000


# Solver labels
COMPLETE = "COMPLETE"
HEURISTIC = "HEURISTIC"

# Equivalence verdicts
EQUAL = "EQUAL"
UNEQUAL = "UNEQUAL"
INCONCLUSIVE = "INCONCLUSIVE"

# Solution JSON schema
SOLUTION_SCHEMA_VERSION = 1
KIND_MN = "mn"
KIND_GENERAL = "general"

# Bundled corpus
bundled_dir_name = "bundled"
bundled_corpus = [
    "z2_m2", "z3_m3", "z4_m4", "z2z2_m4", "z5_m5", "z2z2z3_m12", "z3_m6",
]
bundled_galois = ["z2_m2_galois", "z4_m4_galois", "z2z2_m4_galois"]
gamma_dir_name = "gamma"

tqdm_ncols = 70
tqdm_bar_format = "  {desc}[{n}/{total}] {bar} [{percentage:3.0f}%]{postfix}"
tqdm_case_postfix = lambda case: f"{case} "

# Case reduction for m = 2n
CASE_I = "I"
CASE_II = "II"
CASE_III = "III"
CASE_IV = "IV"
CASE_KINDS = (CASE_I, CASE_II, CASE_III, CASE_IV)
CERTIFICATE_DIGITS = 60
CERTIFICATE_ZERO = 1e-40
CERTIFICATE_ROOT_TOLERANCE = 1e-20

# Fusion rings
DIM_IRRATIONAL = "Irrational"
DIM_RATIONAL = "Rational"
DIM_INCONSISTENT = "Inconsistent"
ALPHA = "alpha"
RHO = "rho"
SIGMA = "sigma"
PI = "pi"
GAMMA_ALPHA = "gamma_alpha"
GAMMA_RHO = "gamma_rho"
DIMENSION_TOLERANCE = 1e-9
OUT_REFINE_STARTS = 8
