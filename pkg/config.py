"""
Configuration for polyloc.

Numerical tolerances and size caps are module-level constants; runtime knobs
(worker count, log level) are read from the environment into a Settings model.
Provides an executor dependency helper used by sweeps and LHV suites.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

from pydantic import BaseModel, Field

from errors import ConfigurationError

PROJECT_ROOT: Path = Path(__file__).resolve().parent
TEMPLATES_DIR: Path = PROJECT_ROOT / "templates"
KNOWN_DISCREPANCIES_PATH: Path = PROJECT_ROOT / "KNOWN_DISCREPANCIES"

# Density matrices
HERMITIAN_TOL: float = 1e-10
TRACE_TOL: float = 1e-10
EIGENVALUE_FLOOR: float = -1e-9
BLOCH_NORM_SLACK: float = 1e-9
PURITY_TOL: float = 1e-9

# Measurements
POVM_PSD_TOL: float = 1e-9
POVM_COMPLETENESS_TOL: float = 1e-10

# Probability tables and inequalities
PROBABILITY_FLOOR: float = -1e-12
NORMALIZATION_TOL: float = 1e-9
VIOLATION_TOL: float = 1e-9
CHSH_TOL: float = 1e-9
SCHMIDT_TOL: float = 1e-12
WEIGHT_TOL: float = 1e-12

# Network size
MIN_PARTIES: int = 3
MAX_PARTIES: int = 6

# Hidden-variable models
LHV_MAX_CARDINALITY: int = 8
LHV_STATE_SPACE_CAP: int = 8 ** 6
LHV_NORMALIZATION_TOL: float = 1e-12
DETERMINISTIC_SWEEP_CAP: int = 1 << 24

# Scanner
THRESHOLD_XTOL: float = 1e-5
MAXIMIZE_POINTS_PER_AXIS: int = 21
MAXIMIZE_GRID_BUDGET: int = 20000
MAXIMIZE_STARTS: int = 5
MAXIMIZE_XATOL: float = 1e-7
DISCREPANCY_RESIDUAL_TOL: float = 1e-6


class Settings(BaseModel):
    """Runtime settings read from the environment."""

    threads: int = Field(..., ge=1, description="Worker cap (POLYLOC_THREADS)")
    log_level: str = Field(default="WARNING", description="Root log level (POLYLOC_LOG_LEVEL)")


def get_settings(environ: Optional[dict] = None) -> Settings:
    """Build Settings from the environment (or an explicit mapping)."""
    env = os.environ if environ is None else environ
    raw_threads = env.get("POLYLOC_THREADS")
    if raw_threads is None or raw_threads == "":
        threads = os.cpu_count() or 1
    else:
        try:
            threads = int(raw_threads)
        except ValueError:
            raise ConfigurationError(f"POLYLOC_THREADS must be an integer, got {raw_threads!r}")
        if threads < 1:
            raise ConfigurationError(f"POLYLOC_THREADS must be >= 1, got {threads}")
    log_level = env.get("POLYLOC_LOG_LEVEL", "WARNING").upper()
    return Settings(threads=threads, log_level=log_level)


@contextmanager
def get_executor(workers: Optional[int] = None) -> Iterator[ThreadPoolExecutor]:
    """Yield a thread pool sized by POLYLOC_THREADS and shut it down after use."""
    pool = ThreadPoolExecutor(max_workers=workers or get_settings().threads)
    try:
        yield pool
    finally:
        pool.shutdown(wait=True)
