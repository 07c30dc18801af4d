import os
import logging
from typing import Optional
from dotenv import load_dotenv
# Load environment variables from .env file if present
load_dotenv()

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger('config')

# Numerical tolerances (dense double-precision eigen-solves at n <= a few hundred)
HERMITIAN_TOL_REL = 1e-9
EIG_TOL = 1e-8
ORTHO_TOL = 1e-9
RECON_TOL = 1e-9
STRICT_CONTRACTION_TOL = 1e-8
# Cancellation slack for inclusion-exclusion results
CLAMP_TOL = 1e-12
PROBABILITY_SLACK = 1e-12
PMF_SUM_TOL = 1e-10
# Sampler phase-1 clipping and phase-2 rank drift
SAMPLER_EIGEN_EPS = 1e-12
SAMPLER_BREAKDOWN_TOL = 1e-6

DEFAULT_ENUM_CAP = 20
DEFAULT_FOCK_CAP = 12
DEFAULT_FOCK_CAP_SMALL = 6
DEFAULT_TENSOR_CAP = 4096
DEFAULT_SEED = 0
DEFAULT_REPLICATE_STRIDE = 1024


def _int_from_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.environ.get(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"{name}={raw!r} is not an integer, using default {default}")
        return default
    if value < minimum:
        logger.warning(f"{name}={value} is below {minimum}, using default {default}")
        return default
    return value


def get_threads() -> int:
    return _int_from_env("DPP_THREADS", os.cpu_count() or 1)


def get_enum_cap() -> int:
    return _int_from_env("DPP_ENUM_CAP", DEFAULT_ENUM_CAP)


def get_fock_cap() -> int:
    return _int_from_env("DPP_FOCK_CAP", DEFAULT_FOCK_CAP)


def get_fock_cap_small() -> int:
    return _int_from_env("DPP_FOCK_CAP_SMALL", DEFAULT_FOCK_CAP_SMALL)


def get_tensor_cap() -> int:
    return _int_from_env("DPP_TENSOR_CAP", DEFAULT_TENSOR_CAP)


def get_default_seed() -> int:
    return _int_from_env("DPP_SEED", DEFAULT_SEED, minimum=0)


def get_replicate_stride() -> int:
    return _int_from_env("DPP_REPLICATE_STRIDE", DEFAULT_REPLICATE_STRIDE)


def get_log_level() -> str:
    return os.environ.get("DPP_LOG_LEVEL", "INFO").upper()


def get_log_file() -> Optional[str]:
    return os.environ.get("DPP_LOG_FILE") or None
