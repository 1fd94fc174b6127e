import logging
import math
import os
import re
import sys

from .errors import DomainError

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(name)s - %(message)s'


def configure_logging(level='WARNING', log_file=None):
    """Configure root logging once per process; stdout stays free for command output."""
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        ensure_directory(os.path.dirname(os.path.abspath(log_file)))
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.WARNING),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def get_logger(name):
    return logging.getLogger(name)


def ensure_directory(path):
    """Ensures a directory exists."""
    if path and not os.path.exists(path):
        os.makedirs(path, exist_ok=True)
        logging.getLogger(__name__).info(f"Created directory: {path}")


# Accepts plain radians ("0.5", "-1e-3") or pi-expressions:
#   [sign] [coefficient] [*] pi [/ denominator]   e.g. "2pi/3", "-pi/2", "11*pi/6"
_PI_EXPRESSION = re.compile(
    r'^\s*(?P<sign>[+-])?\s*(?P<coef>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi'
    r'(?:\s*/\s*(?P<den>\d+(?:\.\d*)?|\.\d+))?\s*$',
    re.IGNORECASE,
)

ANGLE_GRAMMAR_HELP = (
    "angles are radians ('0.5', '-1.2e-3') or pi-expressions "
    "'[sign][coefficient][*]pi[/denominator]' such as 'pi', '2pi/3', '-pi/2', '11*pi/6'"
)


def parse_angle(text):
    """Parse a CLI/graph-file angle into radians."""
    raw = str(text).strip()
    try:
        value = float(raw)
    except ValueError:
        match = _PI_EXPRESSION.match(raw)
        if not match:
            raise DomainError(f"cannot parse angle {text!r}; {ANGLE_GRAMMAR_HELP}")
        coef = float(match.group('coef')) if match.group('coef') else 1.0
        den = float(match.group('den')) if match.group('den') else 1.0
        if den == 0.0:
            raise DomainError(f"zero denominator in angle {text!r}")
        value = coef * math.pi / den
        if match.group('sign') == '-':
            value = -value
    if not math.isfinite(value):
        raise DomainError(f"angle must be finite, got {text!r}")
    return value


def format_real(value):
    """17 significant digits: enough to round-trip any float64."""
    return f"{value:.17g}"
