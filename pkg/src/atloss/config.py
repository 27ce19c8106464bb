"""Configuration, constants, and output-directory helpers."""

import os
from enum import IntEnum
from pathlib import Path


class ExitCode(IntEnum):
    """Process exit codes shared by every command."""

    SUCCESS = 0
    GENERAL_ERROR = 1
    CONFIG_ERROR = 2
    GENERATION_FAILED = 10
    REFINE_FAILED = 20
    TRAINING_FAILED = 30
    VERIFICATION_FAILED = 40
    EXPORT_FAILED = 50
    INVALID_INPUT = 60


# Operational rain/no-rain threshold (mm/h) for the loss and the scores
DEFAULT_THRESHOLD = 2.0

# Light-precipitation threshold used as a second evaluation level
LIGHT_THRESHOLD = 0.5

# Temperature schedule
DEFAULT_TAU_START = 1.0
DEFAULT_TAU_FLOOR = 0.05
# Epochs for tau to reach the floor; a 30-epoch run stays above 0.6
DEFAULT_TAU_HORIZON = 100

# z * perturbation_scale is clamped to this magnitude
DEFAULT_PERTURBATION_SCALE = 0.1
PERTURBATION_CLAMP = 0.5

# Adam and batching
DEFAULT_LEARNING_RATE = 0.0002
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_ADAM_EPS = 1e-8
DEFAULT_BATCH_SIZE = 16

INSTANCE_NORM_EPS = 1e-5

# Sliding windows of consecutive steps
WINDOW_LENGTH = 6
DEFAULT_DT_MINUTES = 10.0

# Baseline loss defaults
DEFAULT_HUBER_DELTA = 1.0
DEFAULT_CHARBONNIER_EPSILON = 1e-3

# Tukey fence multiplier
DEFAULT_TUKEY_K = 1.5

# Cells above this intensity (mm/h) count as wet for Tukey quartiles
DEFAULT_WET_MIN_VALUE = 2.0

# Impulse noise fraction bounds
NOISE_MIN_FRACTION = 0.10
NOISE_MAX_FRACTION = 0.30

# PSNR value reported for identical fields (dB)
PSNR_CAP_DB = 99.0

# Exhaustive penalty oracle refuses instances larger than this
ORACLE_MAX_CELLS = 20

# Literal written to CSV for metrics with a zero denominator
UNDEFINED_LITERAL = "undefined"

LOSS_KINDS = ("at", "mae", "mse", "huber", "charbonnier")
NOISE_KINDS = ("salt_and_pepper", "random_valued_impulse")

OUTPUT_DIR_ENV = "ATLOSS_OUTPUT_DIR"


def get_output_dir(override: Path | None = None) -> Path:
    """
    Returns the output directory, creating it if needed.

    Precedence: explicit override, then ATLOSS_OUTPUT_DIR, then ./atloss-out.
    """
    if override is not None:
        out_dir = Path(override)
    else:
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        out_dir = Path(env_dir) if env_dir and env_dir.strip() else Path("atloss-out")
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir
