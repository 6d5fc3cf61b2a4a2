import logging
import math
import sys

import numpy as np

DEFAULT_T = 5.0
DEFAULT_STEP = 1.0 / 512
DEFAULT_EPS_FACTOR = 10

PAIR_TOL = 5e-3
THEOREM_TOL = 1e-2
MIN_ORDER = 0.8
ROUNDOFF_FLOOR = 1e-10

MAX_RL_NUMERIC_ORDER = 4
SIGNIFICANT_DIGITS = 12

# integer tests on exponents and orders
INTEGER_ATOL = 1e-12

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class GFCalcError(Exception):
    """Base class of every error raised by gfcalc."""


class DomainError(GFCalcError, ValueError):
    """Parameter outside its stated interval, or a function outside C_{-1}."""


class EvaluationError(GFCalcError, ArithmeticError):
    """Series non-convergence, overflow or a non-finite quadrature result."""


class UnsupportedError(GFCalcError, NotImplementedError):
    pass


class SpecError(GFCalcError, ValueError):
    """
    Malformed pair-spec file. The message is anchored as ``path:line:col``.
    """

    def __init__(self, message, path="<spec>", line=1, column=1):
        self.path = path
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {message}")


class AccuracyWarning(UserWarning):
    """A series lost more than the allowed number of digits to cancellation."""


def setup_logging(verbosity=0, stream=None):
    """Install one stderr handler on the package logger; idempotent."""
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    root = logging.getLogger("gfcalc")
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(level)
    return root


def is_integer(x, atol=INTEGER_ATOL):
    return abs(x - round(x)) <= atol


def check_open_interval(name, value, low, high):
    if not (low < value < high):
        raise DomainError(f"{name}={value} outside the open interval ({low}, {high})")


def format_real(x, digits=SIGNIFICANT_DIGITS):
    """
    Fixed formatting of reals for reports: ``digits`` significant digits,
    lowercase scientific notation for magnitudes outside [1e-4, 1e6].
    """
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0"
    if 1e-4 <= abs(x) <= 1e6:
        return np.format_float_positional(x, precision=digits, unique=False,
                                          fractional=False, trim="-")
    return np.format_float_scientific(x, precision=digits - 1, unique=False,
                                      trim="-", exp_digits=2)


def rounded(x, digits=SIGNIFICANT_DIGITS):
    """Round to the report precision, ``None`` for nan (JSON has no nan)."""
    if x is None:
        return None
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return None
    return float(format_real(x, digits))
