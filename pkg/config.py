"""
Configuration file for runtime settings
"""

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _int_setting(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return default


def _float_setting(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return float(raw)
    except ValueError:
        return default


# Monte Carlo worker processes (0 = one per CPU)
NUM_THREADS = _int_setting("RUIN_NUM_THREADS", 0)

# Paths per Monte Carlo substream block; fixed so estimates do not depend on worker count
MC_BLOCK = max(1, _int_setting("RUIN_MC_BLOCK", 65536))

LOG_LEVEL = os.getenv("RUIN_LOG_LEVEL", "WARNING").upper()

# Truncation for Poisson / geometric seasons
TAIL_EPS = _float_setting("RUIN_TAIL_EPS", 1e-12)

# Far-field boundary index: an integer, or "adaptive"
_boundary = os.getenv("RUIN_BOUNDARY_INDEX", "adaptive").strip().lower()
BOUNDARY_INDEX = int(_boundary) if _boundary.isdigit() else "adaptive"


def worker_count() -> int:
    """Resolved number of Monte Carlo workers."""
    if NUM_THREADS > 0:
        return NUM_THREADS
    return os.cpu_count() or 1
