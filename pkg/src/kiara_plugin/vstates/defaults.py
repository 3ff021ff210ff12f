# -*- coding: utf-8 -*-
import os
from enum import Enum

DEFAULT_PRECISION_BITS = 128
MIN_PRECISION_BITS = 16
ZERO_TEST_PRECISION_BITS = 256
MAX_ENCLOSURE_REFINEMENTS = 6

# truncation of the Fourier representation of boundary perturbations
DEFAULT_BLOCKS = 32
DEFAULT_GRID_SIZE = 256
MIN_BLOCKS = 16
MIN_CURVE_SEPARATION = 1e-8

# Lyapunov-Schmidt solver
LS_TOLERANCE = 1e-13
LS_MAX_ITERATIONS = 100
LS_CONTRACTION_RADIUS = 0.1

# reduced system and branch continuation
TOL_REDUCED = 1e-11
TOL_FULL = 1e-9
NEWTON_MAX_ITERATIONS = 50
BRANCH_MAX_BISECTIONS = 3
MIN_FIT_SAMPLES = 5

# finite difference jets, steps by total derivative order
STENCIL_RADIUS = 3
DEFAULT_JET_STEPS = {1: 2e-3, 2: 5e-3, 3: 1.5e-2}
MAX_NUMERIC_JET_ORDER = 3
MAX_EXPANSION_ORDER = 6

STEP_RELATIVE_JACOBIAN = 1e-3
DEFAULT_JACOBIAN_STEP = 1e-5
JACOBIAN_STEP_RANGE = (1e-7, 1e-3)

SUPPORTED_P = (2, 3, 4)
EXPERIMENTAL_P = (5, 6)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_NUMERICAL_FAILURE = 2
EXIT_USAGE = 64

SAMPLES_TABLE_NAME = "samples"
CORRECTIONS_TABLE_NAME = "corrections"
BRANCH_METADATA_KEY = "branch_metadata"
BRANCH_SERIALIZATION_PROFILE = "feather_and_json"

THREADS_ENV_VAR = "VSTATE_THREADS"


def max_threads() -> int:
    """Number of worker threads for stencil fan-out, capped by 'VSTATE_THREADS'."""

    value = os.environ.get(THREADS_ENV_VAR, None)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


class CanonicalForm(Enum):
    SELF = "self"
    OUTER_AT_INNER = "outer_at_inner"
    INNER_AT_OUTER = "inner_at_outer"


class JetMode(Enum):
    NUMERIC = "numeric"
    SYMBOLIC_A = "symbolic_a"
    ZERO_A = "zero_a"


class VerifyMode(Enum):
    SYMBOLIC = "symbolic"
    NUMERIC = "numeric"
    BOTH = "both"


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"
    SVG = "svg"


class DegeneracyStatus(Enum):
    ISOLATED = "isolated"
    DEGENERATE = "degenerate"


class ClaimStatus(Enum):
    MATCH = "match"
    MISMATCH = "mismatch"
    DERIVED = "derived"
    REPORTED = "reported"


ALLOWED_VERIFY_MODE_STRINGS = [x.value for x in VerifyMode]
ALLOWED_SIGN_STRINGS = ["+", "-"]
ALLOWED_OUTPUT_FORMAT_STRINGS = [x.value for x in OutputFormat]
