"""
Application constants and configuration values.
"""

from pathlib import Path

# Application information
APP_NAME = "pepa-psni"
APP_VERSION = "0.1.0"

# File paths
APP_DIR = Path(__file__).parent.parent
RESOURCES_DIR = APP_DIR / "resources"
SCHEMA_DIR = RESOURCES_DIR / "schema"
MODELS_DIR = RESOURCES_DIR / "models"

# Schema files
VERDICT_SCHEMA_PATH = SCHEMA_DIR / "psni_verdict_schema.json"

# Golden models
FIG1_MODEL_PATH = MODELS_DIR / "fig1.pepa"
FIG2_MODEL_PATH = MODELS_DIR / "fig2.pepa"

# Reserved words of the model language
TAU = "tau"
TOP_SYMBOL = "T"
KEYWORD_HIGH = "high"
KEYWORD_SYSTEM = "system"

# State-space exploration
DEFAULT_MAX_STATES = 100000
MAX_STATES_ENV_VAR = "PSNI_MAX_STATES"

# Steady-state solver
DENSE_SOLVER_LIMIT = 2000
UNIFORMIZATION_FACTOR = 1.1
ITERATIVE_TOLERANCE = 1e-14
ITERATIVE_MAX_ITERATIONS = 200000

# Numerical tolerances
PROBABILITY_TOLERANCE = 1e-12
RESIDUAL_TOLERANCE = 1e-10
LUMPING_TOLERANCE = 1e-9

# Partition refinement
VERIFY_PARTITIONS = True

# Logging settings
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DEFAULT_LOG_LEVEL = "WARNING"
LOG_MAX_SIZE = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT = 5

# Exit status codes
EXIT_OK = 0
EXIT_PSNI_FAILS = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE_ERROR = 3

# File format versions
CURRENT_JSON_VERSION = "1.0.0"
