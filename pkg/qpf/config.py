"""Runtime settings read from the environment (and a local ``.env`` file)."""

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from .utils import get_logger

load_dotenv()

logger = get_logger(__name__)

# Get the repository root (one level above the package)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

IDENTITY_TOL = 1e-12
DEFAULT_TOL = 1e-10
DEFAULT_SEED = 20240917
DEFAULT_CUTOFF = 4
MIN_CUTOFF = 2
MAX_REGISTER = 4


@dataclass(frozen=True)
class Settings:
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    cutoff: int = DEFAULT_CUTOFF
    log_level: str = 'WARNING'
    log_file: str | None = None
    report_dir: str = os.path.join('.tmp', 'reports')


def _env_number(key, default, cast):
    raw = os.environ.get(key)
    if raw is None or raw.strip() == '':
        return default
    try:
        return cast(raw)
    except ValueError:
        logger.warning(f"Ignoring malformed {key}={raw!r}, using {default}")
        return default


def load_settings() -> Settings:
    tol = _env_number('QPF_TOL', DEFAULT_TOL, float)
    if not tol > 0:
        logger.warning(f"QPF_TOL must be positive, using {DEFAULT_TOL}")
        tol = DEFAULT_TOL

    cutoff = _env_number('QPF_CUTOFF', DEFAULT_CUTOFF, int)
    if cutoff < MIN_CUTOFF:
        logger.warning(f"QPF_CUTOFF must be >= {MIN_CUTOFF}, using {DEFAULT_CUTOFF}")
        cutoff = DEFAULT_CUTOFF

    return Settings(
        tol=tol,
        seed=_env_number('QPF_SEED', DEFAULT_SEED, int),
        cutoff=cutoff,
        log_level=os.environ.get('QPF_LOG_LEVEL', 'WARNING'),
        log_file=os.environ.get('QPF_LOG_FILE') or None,
        report_dir=os.environ.get('QPF_REPORT_DIR') or Settings.report_dir,
    )
