r"""
Series evaluation of the special functions behind the kernel families.

Every function accepts a float or a numpy array for its last argument and
returns the same kind. The series are summed term by term with a relative
stopping rule controlled by :class:`SeriesPolicy`:

* :func:`gamma_fn`, a Lanczos approximation of :math:`\Gamma(x)`, :math:`x > 0`.
* :func:`gamma_lower`, :math:`\gamma(\beta, t) = \int_0^t \tau^{\beta-1} e^{-\tau} d\tau`.
  It uses the series below :math:`t = \beta + 10` and the continued fraction
  of the complement above it.
* :func:`kummer_phi`, :math:`\Phi(\beta, \alpha; z) = \sum_k (\beta)_k/(\alpha)_k z^k/k!`.
  For :math:`z < 0` it applies Kummer's transformation.
* :func:`bessel_j` and :func:`bessel_i`, the Bessel and modified Bessel
  functions of real order :math:`\alpha > -1`.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .utils import AccuracyWarning, DomainError, EvaluationError, is_integer

logger = logging.getLogger(__name__)

# Lanczos approximation, g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_GAMMA_OVERFLOW = 171.6

# continued fraction for the upper incomplete gamma
_CF_TINY = 1e-300
_CF_SWITCH = 10.0

# cancellation budget of alternating series, in decimal digits
MAX_LOST_DIGITS = 6.0


@dataclass(frozen=True)
class SeriesPolicy:
    """
    Truncation rule of every series in this module.

    :param rel_term_tol: stop once a term is at most this fraction of the partial sum
    :type rel_term_tol: float
    :param max_terms: give up (``EvaluationError``) after this many terms
    :type max_terms: int
    """

    rel_term_tol: float = 1e-15
    max_terms: int = 300

    def __post_init__(self):
        if not self.rel_term_tol > 0:
            raise DomainError(f"rel_term_tol must be positive, got {self.rel_term_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")


DEFAULT_POLICY = SeriesPolicy()


@dataclass(frozen=True)
class SeriesResult:
    """Value of a summed series together with its accuracy metadata."""

    value: object
    terms: int
    lost_digits: float
    accurate: bool


def _as_output(value, scalar):
    if scalar:
        return float(np.asarray(value).reshape(-1)[0])
    return value


def _sum_series(first, ratio, policy, what, min_terms=0):
    """
    Sum a_0 + a_1 + ... with a_{k+1} = a_k * ratio(k).

    ``first`` and ``ratio(k)`` broadcast against each other. The series stops
    when every element satisfies the relative term test after ``min_terms``
    terms, and raises ``EvaluationError`` if ``policy.max_terms`` is exhausted.
    """
    term = np.array(first, dtype=float)
    total = term.copy()
    largest = np.abs(term)
    for k in range(policy.max_terms):
        term = term * ratio(k)
        total = total + term
        largest = np.maximum(largest, np.abs(term))
        if k + 1 >= min_terms and np.all(np.abs(term) <= policy.rel_term_tol * np.abs(total)):
            break
    else:
        raise EvaluationError(f"{what}: series did not converge within {policy.max_terms} terms")
    if not np.all(np.isfinite(total)):
        raise EvaluationError(f"{what}: series overflow")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio_lost = np.where(total != 0, largest / np.abs(total), 1.0)
    lost = float(np.log10(np.max(np.maximum(ratio_lost, 1.0))))
    return total, k + 2, lost


def gamma_fn(x):
    r"""
    :math:`\Gamma(x)` for :math:`x > 0`.

    Positive integers up to 171 are returned exactly as factorials. Other
    arguments use the Lanczos sum, and the reflection formula below 1/2.
    """
    x = float(x)
    if not x > 0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    if x > _GAMMA_OVERFLOW:
        raise EvaluationError(f"gamma_fn overflows at x={x}")
    if is_integer(x, 0.0):
        return float(math.factorial(int(x) - 1))
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    x -= 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (x + 0.5) * math.exp(-t) * acc


def beta_fn(a, b):
    """Euler's Beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b) for a, b > 0."""
    return gamma_fn(a) * gamma_fn(b) / gamma_fn(a + b)


def _upper_gamma_cf(beta, t, policy):
    """Γ(β, t) by the modified Lentz continued fraction; valid for t > β + 1."""
    b = t + 1.0 - beta
    c = np.full_like(t, 1.0 / _CF_TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, policy.max_terms + 1):
        an = -i * (i - beta)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _CF_TINY, _CF_TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _CF_TINY, _CF_TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= policy.rel_term_tol):
            break
    else:
        raise EvaluationError(f"gamma_lower({beta}, ...): continued fraction did not converge")
    return np.exp(beta * np.log(t) - t) * h


def gamma_lower(beta, t, policy=None):
    """Lower incomplete gamma function γ(β, t) for β > 0, t ≥ 0."""
    policy = policy or DEFAULT_POLICY
    beta = float(beta)
    if not beta > 0:
        raise DomainError(f"gamma_lower requires beta > 0, got {beta}")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise DomainError("gamma_lower requires t >= 0")

    out = np.zeros_like(t)
    far = t > beta + _CF_SWITCH
    near = ~far & (t > 0)
    if np.any(near):
        tn = t[near]
        total, _, _ = _sum_series(np.full_like(tn, 1.0 / beta),
                                  lambda k: tn / (beta + k + 1.0),
                                  policy, f"gamma_lower({beta}, ...)",
                                  min_terms=int(tn.max()) + 1)
        out[near] = tn ** beta * np.exp(-tn) * total
    if np.any(far):
        out[far] = gamma_fn(beta) - _upper_gamma_cf(beta, t[far], policy)
    return _as_output(out, scalar)


def kummer_phi(beta, alpha, z, policy=None):
    """
    Kummer's confluent hypergeometric function Φ(β, α; z).

    Negative arguments are evaluated as e^z Φ(α−β, α; −z), which keeps the
    summed terms of one sign for the parameter ranges used by the kernels.
    """
    policy = policy or DEFAULT_POLICY
    beta = float(beta)
    alpha = float(alpha)
    if alpha <= 0 and is_integer(alpha):
        raise DomainError(f"kummer_phi undefined for alpha={alpha} (non-positive integer)")
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.empty_like(z)

    def series(b, w):
        total, _, _ = _sum_series(np.ones_like(w),
                                  lambda k: (b + k) * w / ((alpha + k) * (k + 1.0)),
                                  policy, f"kummer_phi({beta}, {alpha}, ...)",
                                  min_terms=int(np.abs(w).max()) + 1)
        return total

    neg = z < 0
    if np.any(~neg):
        out[~neg] = series(beta, z[~neg])
    if np.any(neg):
        zn = z[neg]
        out[neg] = np.exp(zn) * series(alpha - beta, -zn)
    return _as_output(out, scalar)


def bessel_series(nu, x, policy=None, full_output=False):
    r"""
    Entire part of the Bessel functions, :math:`\sum_k x^k / (k!\,\Gamma(\nu+k+1))`.

    ``J_ν(t) = (t/2)^ν S(−t²/4)`` and ``I_ν(t) = (t/2)^ν S(t²/4)``. The
    kernels use ``S`` directly as their smooth factor.
    """
    policy = policy or DEFAULT_POLICY
    nu = float(nu)
    if not nu > -1:
        raise DomainError(f"Bessel order must exceed -1, got {nu}")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    total, terms, lost = _sum_series(np.full_like(x, 1.0 / gamma_fn(nu + 1.0)),
                                     lambda k: x / ((k + 1.0) * (nu + k + 1.0)),
                                     policy, f"bessel_series({nu}, ...)",
                                     min_terms=int(math.sqrt(np.abs(x).max())) + 1)
    value = _as_output(total, scalar)
    if full_output:
        return SeriesResult(value, terms, lost, lost <= MAX_LOST_DIGITS)
    return value


def bessel_terms(alpha, t, count, modified=False):
    """The first ``count`` terms of the J (or I) series at a scalar t."""
    half = 0.5 * float(t)
    sign = 1.0 if modified else -1.0
    terms = np.empty(count)
    term = half ** alpha / gamma_fn(alpha + 1.0)
    for k in range(count):
        terms[k] = term
        term *= sign * half * half / ((k + 1.0) * (alpha + k + 1.0))
    return terms


def _bessel(alpha, t, policy, full_output, modified):
    alpha = float(alpha)
    if not alpha > -1:
        raise DomainError(f"Bessel order must exceed -1, got {alpha}")
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise DomainError("Bessel functions are evaluated for t >= 0 only")
    if alpha < 0 and np.any(t == 0):
        raise DomainError(f"Bessel function of order {alpha} is unbounded at t=0")
    quarter = 0.25 * t * t
    result = bessel_series(alpha, quarter if modified else -quarter, policy, full_output=True)
    value = np.power(0.5 * t, alpha) * result.value
    name = "bessel_i" if modified else "bessel_j"
    if not result.accurate:
        warnings.warn(f"{name}({alpha}, t<={t.max():g}) lost {result.lost_digits:.1f} "
                      "digits to cancellation", AccuracyWarning, stacklevel=3)
    value = _as_output(value, scalar)
    if full_output:
        return SeriesResult(value, result.terms, result.lost_digits, result.accurate)
    return value


def bessel_j(alpha, t, policy=None, full_output=False):
    """Bessel function J_α(t), α > −1, t ≥ 0, from its alternating series."""
    return _bessel(alpha, t, policy, full_output, modified=False)


def bessel_i(alpha, t, policy=None, full_output=False):
    """Modified Bessel function I_α(t), α > −1, t ≥ 0."""
    return _bessel(alpha, t, policy, full_output, modified=True)
