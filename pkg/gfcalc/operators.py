r"""
General fractional integral and derivatives of a kernel pair (M, N).

* :func:`gfi`, the integral ``M * X``.
* :func:`gfd_caputo`, the Caputo-type derivative ``N * X^{(n)}``.
* :func:`gfd_rl`, the Riemann-Liouville-type derivative ``d^n/dt^n (N * X)``.

Operands are :class:`TestFunction` instances or functions already sampled
on the grid (:class:`~gfcalc.conv.SampledFunction`).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import simplify
from .conv import SampledFunction, differentiate, num_conv, sample
from .utils import DomainError, EvaluationError, MAX_RL_NUMERIC_ORDER, UnsupportedError

logger = logging.getLogger(__name__)

# derivative evaluators are checked against centred differences here
CHECK_POINTS = np.linspace(0.5, 2.0, 16)
CHECK_STEP = 1e-4
CHECK_RTOL = 1e-6

RL_PATHS = ("auto", "regularized", "numeric")


def _evaluate(fn, t):
    t = np.asarray(t, dtype=float)
    return np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape).astype(float)


@dataclass(frozen=True)
class TestFunction:
    """
    Test function ``X(t) = t**exponent * smooth(t)``.

    :param name: catalog name, used in reports
    :param smooth: evaluator of the smooth factor on numpy arrays, ``t >= 0``
    :param exponent: singular exponent, ``> -1``
    :param derivatives: evaluators of X', X'', ... (only for ``exponent == 0``)
    :param initial_values: X(0), X'(0), ... given explicitly
    :param smoothness: declared n with X in C^n_{-1}; defaults to the number
        of derivative evaluators
    """

    __test__ = False

    name: str
    smooth: Callable
    exponent: float = 0.0
    derivatives: tuple = ()
    initial_values: tuple = ()
    smoothness: Optional[int] = None

    def __post_init__(self):
        if not self.exponent > -1:
            raise DomainError(f"test function {self.name} has exponent {self.exponent} <= -1")
        if self.derivatives and self.exponent != 0:
            raise DomainError(f"{self.name}: analytic derivatives need exponent 0")
        if self.smoothness is None:
            object.__setattr__(self, "smoothness", len(self.derivatives))
        self._check_derivatives()

    def _check_derivatives(self):
        h = CHECK_STEP
        previous = self.smooth
        for k, deriv in enumerate(self.derivatives, start=1):
            central = (_evaluate(previous, CHECK_POINTS + h)
                       - _evaluate(previous, CHECK_POINTS - h)) / (2.0 * h)
            exact = _evaluate(deriv, CHECK_POINTS)
            err = np.abs(central - exact) / np.maximum(1.0, np.abs(exact))
            if np.max(err) > CHECK_RTOL:
                raise DomainError(f"{self.name}: derivative {k} disagrees with finite "
                                  f"differences by {np.max(err):.2e}")
            previous = deriv
        if self.exponent != 0:
            return
        for k, value in enumerate(self.initial_values[: len(self.derivatives) + 1]):
            at_zero = float(_evaluate(self.derivative(k), 0.0))
            if abs(at_zero - value) > CHECK_RTOL * max(1.0, abs(value)):
                raise DomainError(f"{self.name}: initial value X^({k})(0)={value} "
                                  f"but the evaluator gives {at_zero}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        value = np.power(t, self.exponent) * _evaluate(self.smooth, t)
        return float(value) if value.ndim == 0 else value

    def derivative(self, k):
        """Evaluator of X^{(k)}; k = 0 gives X itself."""
        if k == 0:
            return self.smooth if self.exponent == 0 else self
        if k > len(self.derivatives):
            raise DomainError(f"{self.name} has no analytic derivative of order {k}")
        return self.derivatives[k - 1]

    def in_Cn(self, n):
        return self.smoothness >= n

    def sample(self, grid):
        return SampledFunction(grid, self.exponent, _evaluate(self.smooth, grid.nodes),
                               label=self.name)

    def taylor(self, n, t):
        """Σ_{k<n} X^{(k)}(0) t^k/k!, the part removed by the Caputo derivative."""
        if len(self.initial_values) < n:
            raise DomainError(f"{self.name}: needs {n} initial values, "
                              f"has {len(self.initial_values)}")
        t = np.asarray(t, dtype=float)
        return sum(self.initial_values[k] * t ** k / math.factorial(k) for k in range(n))

    def __str__(self):
        return self.name


def combine(terms, name=None):
    """Linear combination Σ c_i X_i of test functions sharing one exponent."""
    terms = [(float(c), X) for c, X in terms]
    if not terms:
        raise DomainError("combine needs at least one term")
    exponent = terms[0][1].exponent
    if any(X.exponent != exponent for _, X in terms):
        raise DomainError("combine needs test functions with a common exponent")

    coefs = [c for c, _ in terms]

    def linear(fns):
        return lambda t: sum(c * _evaluate(fn, t) for c, fn in zip(coefs, fns))

    K = min(len(X.derivatives) for _, X in terms)
    derivatives = tuple(linear([X.derivatives[k] for _, X in terms]) for k in range(K))
    L = min(len(X.initial_values) for _, X in terms)
    initial_values = tuple(sum(c * X.initial_values[k] for c, X in terms) for k in range(L))
    return TestFunction(name or " + ".join(f"{c:g}*{X.name}" for c, X in terms),
                        linear([X.smooth for _, X in terms]), exponent, derivatives,
                        initial_values, min(X.smoothness for _, X in terms))


def _sampled(X, grid):
    if isinstance(X, TestFunction):
        return X.sample(grid)
    return sample(X, grid)


def gfi(pair, X, grid):
    """General fractional integral (M * X)(t)."""
    return num_conv(pair.M, _sampled(X, grid), grid)


def _nth_derivative(X, n, grid):
    if isinstance(X, TestFunction):
        if not X.in_Cn(n):
            raise DomainError(f"{X.name} is not declared in C^{n}_(-1)")
        if n <= len(X.derivatives):
            values = _evaluate(X.derivative(n), grid.nodes)
            return SampledFunction(grid, 0.0, values, label=f"d{n}({X.name})")
        logger.debug("%s: no analytic derivative of order %d, differencing", X.name, n)
        return differentiate(X.sample(grid), n)
    return differentiate(_sampled(X, grid), n)


def gfd_caputo(pair, X, grid):
    """General fractional derivative of Caputo type, (N * X^{(n)})(t)."""
    derivative = _nth_derivative(X, pair.order_n, grid)
    return num_conv(pair.N, derivative, grid)


def _regularization_terms(pair, X):
    """
    Kernels N^{(n-1-k)} with coefficients X^{(k)}(0), or None when N has no
    analytic derivatives or X lacks the required data.
    """
    n = pair.order_n
    if not isinstance(X, TestFunction) or not X.in_Cn(n) or len(X.initial_values) < n:
        return None
    N = simplify(pair.N)
    if not N.is_leaf or not N.factors[0].has_analytic_derivatives:
        return None
    terms = []
    for k in range(n):
        if X.initial_values[k] == 0:
            continue
        try:
            kernel = N.factors[0].derivative(n - 1 - k)
        except DomainError:
            return None
        if kernel is not None:
            terms.append((X.initial_values[k], kernel))
    return terms


def _rl_numeric(pair, X, grid):
    n = pair.order_n
    if n > MAX_RL_NUMERIC_ORDER:
        raise UnsupportedError(f"numeric RL derivative supports order <= {MAX_RL_NUMERIC_ORDER}, "
                               f"got {n}")
    inner = num_conv(pair.N, _sampled(X, grid), grid)
    try:
        return differentiate(inner, n)
    except DomainError as exc:
        # pointwise values exist, but the result is no longer in C_(-1)
        raise EvaluationError(f"RL derivative of {X} with {pair.label}: {exc}") from exc


def gfd_rl(pair, X, grid, path="auto"):
    """
    General fractional derivative of Riemann-Liouville type, d^n/dt^n (N * X).

    ``path="regularized"`` evaluates D*X + Σ_{k<n} X^{(k)}(0) N^{(n-1-k)};
    it needs a Power or Moment kernel N and a test function with initial
    values. ``path="numeric"`` differentiates the sampled convolution n
    times and supports n <= 4. ``"auto"`` prefers the regularized path.
    """
    if path not in RL_PATHS:
        raise DomainError(f"unknown RL path {path!r}, expected one of {RL_PATHS}")
    if path != "numeric":
        terms = _regularization_terms(pair, X)
        if terms is not None:
            result = gfd_caputo(pair, X, grid)
            for coef, kernel in terms:
                result = result + coef * sample(kernel, grid)
            return SampledFunction(grid, result.p, result.smooth_values,
                                   label=f"D_rl({X})", flags=result.flags | {"rl-regularized"})
        if path == "regularized":
            logger.warning("regularized RL path not applicable to %s with %s; "
                           "falling back to numeric differentiation", pair.label, X)
    result = _rl_numeric(pair, X, grid)
    flags = {"rl-numeric"} | ({"rl-fallback"} if path == "regularized" else set())
    return SampledFunction(grid, result.p, result.smooth_values, label=f"D_rl({X})",
                           flags=result.flags | flags)
