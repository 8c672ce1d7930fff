"""Toolkit-wide defaults and environment overrides."""
import os
import zlib

# Clustering
DEFAULT_M = 2.0
DEFAULT_EPS = 1e-5
DEFAULT_MAX_ITER = 300
DEFAULT_ALPHA = 0.7
DEFAULT_BETA = 0.3

# Gravity model exponents: w_ij = (pop_i * pop_j)^b / d_ij^a
DEFAULT_GRAVITY_A = 1.0
DEFAULT_GRAVITY_B = 1.0
EARTH_RADIUS_KM = 6371.0

# Context generation
F1_CLAMP = 1e-6
RANDOM_CONTEXT_LOW = 0.01  # open lower bound, upper bound 1.0 inclusive

# Validity
IFV_CLAMP = 1e-12

# Tolerances
ROW_SUM_TOL = 1e-9
ALPHA_BETA_TOL = 1e-12

# Output
CSV_DECIMALS = 6

# Environment
MAX_WORKERS = int(os.getenv("CFGWC_MAX_WORKERS", "4"))

SEED_MODULUS = 2**32


def derive_seed(seed: int, component: str) -> int:
    """Base seed plus a fixed crc32 offset of the component name."""
    return (int(seed) + zlib.crc32(component.encode("utf-8"))) % SEED_MODULUS
