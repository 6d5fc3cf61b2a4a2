r"""
Laplace convolution of functions in factored singular form on a uniform grid.

A :class:`SampledFunction` stores ``f(t) = t^p g(t)`` as the exponent ``p``
and the samples of ``g`` at ``t_0 = 0, ..., t_J = T``. For an output node
:math:`t_j`, the convolution

.. math::

    (f * g)(t_j) = h^{p_f + p_g + 1} \int_0^j (j - s)^{p_f} F(j - s)\, s^{p_g} G(s)\, ds

is written in index units and split at :math:`s = j/2`. The left half keeps
:math:`s^{p_g}` as an exact weight and interpolates the rest. The right half
mirrors it with the weight :math:`(j-s)^{p_f}`. Each panel integrates the
linear interpolant of the co-factor exactly, plus a curvature correction:
the exact moment of the interpolation error times a centred second
difference. Odd j end in a half panel that reuses the interpolant of its
full panel.

The interpolated co-factor still carries the opposite power, so the rule
alone has a relative error that depends on j only. Each node is divided by
the same rule applied to the bare powers and multiplied by their exact
convolution :math:`B(p_f+1, p_g+1) j^{p_f+p_g+1}`. Products of powers are
then exact, and the error left in the smooth factor is O(step), which keeps
nested convolutions at the order of a single one. The error is a smooth
function of :math:`t_j`, so results can be differentiated numerically.
"""

from __future__ import annotations

import dataclasses
import enum
import functools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from . import specfun
from .algebra import KernelExpr, simplify
from .kernels import Kernel, moment_kernel
from .utils import (
    DomainError, EvaluationError, MIN_ORDER, PAIR_TOL, ROUNDOFF_FLOOR, is_integer,
)

logger = logging.getLogger(__name__)

# panel moments switch from closed differences to binomial series here
SERIES_START = 8
SERIES_TERMS = 22


@dataclass(frozen=True)
class Grid:
    """
    Uniform grid t_j = j*step, j = 0..J on [0, T].

    :param T: horizon
    :type T: float
    :param step: grid step; must divide T
    :type step: float
    """

    T: float
    step: float

    def __post_init__(self):
        if not (self.T > 0 and self.step > 0):
            raise DomainError(f"grid needs T > 0 and step > 0, got T={self.T}, step={self.step}")
        ratio = self.T / self.step
        if abs(ratio - round(ratio)) > 1e-12 * ratio:
            raise DomainError(f"step {self.step} does not divide T={self.T}")
        if round(ratio) < 8:
            raise DomainError(f"grid needs at least 8 points, got {round(ratio)}")

    @property
    def J(self):
        return int(round(self.T / self.step))

    @cached_property
    def nodes(self):
        nodes = np.arange(self.J + 1) * self.step
        nodes.flags.writeable = False
        return nodes

    @property
    def points(self):
        """Evaluation points t_1..t_J; t = 0 is excluded."""
        return self.nodes[1:]

    def refined(self):
        return Grid(self.T, self.step / 2.0)

    def window(self, eps):
        """Mask of the points inside [eps, T]."""
        if not 0 < eps < self.T:
            raise DomainError(f"observation window needs 0 < eps < T, got eps={eps}")
        return self.points >= eps - 1e-12 * self.T

    def index(self, t):
        j = t / self.step
        if abs(j - round(j)) > 1e-9 or not 0 <= round(j) <= self.J:
            raise DomainError(f"t={t} is not a node of {self}")
        return int(round(j))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """
    Function ``t**p * g(t)`` sampled on a grid, with ``g`` sampled at t = 0 too.

    Instances are immutable and support addition, subtraction and scaling.
    Terms with different exponents are combined on the smaller one.
    """

    grid: Grid
    p: float
    smooth_values: np.ndarray
    label: str = ""
    flags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.p > -1:
            raise DomainError(f"{self.label or 'sampled function'} has p={self.p} <= -1")
        values = np.array(self.smooth_values, dtype=float)
        if values.shape != (self.grid.J + 1,):
            raise DomainError(f"expected {self.grid.J + 1} samples, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise EvaluationError(f"{self.label or 'sampled function'} has non-finite samples")
        values.flags.writeable = False
        object.__setattr__(self, "smooth_values", values)

    def values(self):
        """Function values at t_1..t_J."""
        return np.power(self.grid.points, self.p) * self.smooth_values[1:]

    def at(self, t):
        j = self.grid.index(t)
        if j == 0:
            raise DomainError("function values are defined for t > 0 only")
        return float(self.grid.nodes[j] ** self.p * self.smooth_values[j])

    def _combine(self, other, sign):
        if not isinstance(other, SampledFunction):
            return NotImplemented
        if other.grid != self.grid:
            raise DomainError("cannot combine functions sampled on different grids")
        low, high = (self, other) if self.p <= other.p else (other, self)
        shift = np.power(self.grid.nodes, high.p - low.p)
        low_sign = 1.0 if low is self else sign
        high_sign = sign if high is other else 1.0
        smooth = low_sign * low.smooth_values + high_sign * shift * high.smooth_values
        return SampledFunction(self.grid, low.p, smooth, flags=self.flags | other.flags)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __mul__(self, scale):
        if isinstance(scale, SampledFunction):
            return NotImplemented
        return dataclasses.replace(self, smooth_values=float(scale) * self.smooth_values)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def zeros(grid):
    return SampledFunction(grid, 0.0, np.zeros(grid.J + 1), label="0")


def sample(operand, grid):
    """Materialize a SampledFunction, Kernel or KernelExpr on ``grid``."""
    if isinstance(operand, SampledFunction):
        if operand.grid != grid:
            raise DomainError("operand is sampled on a different grid")
        return operand
    if isinstance(operand, Kernel):
        return SampledFunction(grid, operand.p, operand.smooth(grid.nodes), label=operand.label)
    if isinstance(operand, KernelExpr):
        return _materialize(simplify(operand), grid)
    raise TypeError(f"cannot sample {type(operand).__name__}")


@functools.lru_cache(maxsize=256)
def _materialize(expr, grid):
    if expr.is_leaf:
        return sample(expr.factors[0], grid)
    logger.debug("materializing %s on J=%d", expr.label, grid.J)
    head = _materialize(KernelExpr(expr.factors[:-1]), grid)
    tail = sample(expr.factors[-1], grid)
    return dataclasses.replace(_convolve(head, tail), label=expr.label)


def clear_cache():
    _materialize.cache_clear()


def _binomials(w, count):
    coeffs = np.empty(count)
    coeffs[0] = 1.0
    for m in range(1, count):
        coeffs[m] = coeffs[m - 1] * (w - m + 1) / m
    return coeffs


def _moments(w, starts, width):
    """
    Moments of s^w over [i, i + width] for each start i:
    A = ∫ s^w (i+1-s), B = ∫ s^w (s-i), Q = ½∫ s^w (s-i)(s-i-1).
    """
    starts = np.asarray(starts, dtype=float)
    A = np.empty_like(starts)
    B = np.empty_like(starts)
    Q = np.empty_like(starts)

    near = starts < SERIES_START
    i = starts[near]
    e = i + width
    w0 = (e ** (w + 1) - i ** (w + 1)) / (w + 1)
    w1 = (e ** (w + 2) - i ** (w + 2)) / (w + 2)
    w2 = (e ** (w + 3) - i ** (w + 3)) / (w + 3)
    A[near] = (i + 1) * w0 - w1
    B[near] = w1 - i * w0
    Q[near] = 0.5 * (w2 - (2 * i + 1) * w1 + i * (i + 1) * w0)

    far = ~near
    if np.any(far):
        i = starts[far]
        m = np.arange(SERIES_TERMS)
        # ∫_0^width x^m dx, ∫_0^width x^{m+1} dx, ∫_0^width x^{m+2} dx
        x0 = width ** (m + 1) / (m + 1)
        x1 = width ** (m + 2) / (m + 2)
        x2 = width ** (m + 3) / (m + 3)
        series = _binomials(w, SERIES_TERMS) * np.power.outer(i, -m.astype(float))
        scale = i ** w
        A[far] = scale * (series @ (x0 - x1))
        B[far] = scale * (series @ x1)
        Q[far] = 0.5 * scale * (series @ (x2 - x1))
    return A, B, Q


def _panel_terms(i, A, B, Q):
    """(index, coefficient) contributions of panel i to the corrected rule."""
    if i == 0:
        # curvature of the first panel from the second difference at s = 1
        return ((0, A[0] + Q[0]), (1, B[0] - 2.0 * Q[0]), (2, Q[0]))
    half = 0.5 * Q[i]
    return ((i - 1, half), (i, A[i] - half), (i + 1, B[i] - half), (i + 2, half))


@functools.lru_cache(maxsize=128)
def _rule(w, kmax):
    """
    Weights of the corrected product rule with weight s^w.

    Returns ``base`` (coefficients of samples 0..k-2, identical for every
    output point) and ``tails[k, odd]`` (coefficients of samples k-1..k+2).
    """
    A, B, Q = _moments(w, np.arange(kmax + 1), 1.0)
    Ap, Bp, Qp = _moments(w, np.arange(kmax + 1), 0.5)

    base = np.zeros(kmax + 4)
    for i in range(kmax + 1):
        for m, coef in _panel_terms(i, A, B, Q):
            base[m] += coef

    tails = np.zeros((kmax + 1, 2, 4))
    for k in range(2, kmax + 1):
        for i in range(max(0, k - 3), k):
            for m, coef in _panel_terms(i, A, B, Q):
                if m >= k - 1:
                    tails[k, :, m - k + 1] += coef
        half = 0.5 * Qp[k]
        for m, coef in ((k - 1, half), (k, Ap[k] - half), (k + 1, Bp[k] - half), (k + 2, half)):
            tails[k, 1, m - k + 1] += coef

    plain = (A[0], B[0], Ap[1], Bp[1])
    base.flags.writeable = False
    tails.flags.writeable = False
    return base, tails, plain


def _half_sums(w, near, far):
    """
    ∫_0^{j/2} s^w near(s) far(j-s) ds for every j, with far[m] = m^e F_m
    already carrying the opposite singular factor.
    """
    J = len(near) - 1
    kmax = J // 2
    base, tails, plain = _rule(float(w), kmax)
    out = np.zeros(J + 1)

    a0, b0, ap1, bp1 = plain
    out[2] = a0 * near[0] * far[2] + b0 * near[1] * far[1]
    out[3] = a0 * near[0] * far[3] + (b0 + ap1) * near[1] * far[2] + bp1 * near[2] * far[1]

    js = np.arange(4, J + 1)
    ks = js // 2
    based = base[: kmax + 1] * near[: kmax + 1]
    head = np.fromiter((based[: k - 1] @ far[j: j - k + 1: -1] for j, k in zip(js, ks)),
                       dtype=float, count=len(js))
    coefs = tails[ks, js % 2]
    slots = np.arange(4)
    m = ks[:, None] - 1 + slots[None, :]
    tail = np.sum(coefs * near[m] * far[js[:, None] - m], axis=1)
    out[4:] = head + tail
    return out


def _far(p, smooth):
    idx = np.arange(1, len(smooth), dtype=float)
    return np.concatenate(([0.0], np.power(idx, p) * smooth[1:]))


@functools.lru_cache(maxsize=64)
def _power_scale(a, b, J):
    """B(a+1, b+1) over the rule applied to s^b (j-s)^a, for j = 2..J."""
    ones = np.ones(J + 1)
    unit = _half_sums(b, ones, _far(a, ones)) + _half_sums(a, ones, _far(b, ones))
    scale = specfun.beta_fn(a + 1.0, b + 1.0) / unit[2:]
    scale.flags.writeable = False
    return scale


def _convolve(f, g):
    grid = f.grid
    a, b = f.p, g.p
    F, G = f.smooth_values, g.smooth_values
    J = grid.J

    with np.errstate(over="raise", invalid="raise"):
        try:
            total = _half_sums(b, G, _far(a, F)) + _half_sums(a, F, _far(b, G))
            smooth = np.empty(J + 1)
            b11 = specfun.beta_fn(a + 1.0, b + 1.0)
            smooth[0] = F[0] * G[0] * b11
            # first panel carries both singularities: exact Beta moments
            smooth[1] = F[1] * G[0] * b11 + (F[0] * G[1] - F[1] * G[0]) * specfun.beta_fn(a + 1.0, b + 2.0)
            smooth[2:] = total[2:] * _power_scale(float(a), float(b), J)
        except FloatingPointError as exc:
            raise EvaluationError(f"convolution overflow: {exc}") from exc
    if not np.all(np.isfinite(smooth)):
        raise EvaluationError("convolution produced non-finite values")
    return SampledFunction(grid, a + b + 1.0, smooth)


def num_conv(f, g, grid):
    """
    Laplace convolution (f*g)(t) = ∫_0^t f(t-τ) g(τ) dτ on ``grid``.

    Operands are SampledFunctions, Kernels or KernelExprs. The result has
    exponent p_f + p_g + 1.
    """
    f = sample(f, grid)
    g = sample(g, grid)
    result = _convolve(f, g)
    label = f"({f.label} * {g.label})" if f.label and g.label else ""
    return dataclasses.replace(result, label=label)


def iterated_integral(X, n):
    """I^n X, the n-fold integral, as the convolution with h_n."""
    if int(n) != n or n < 1:
        raise DomainError(f"iterated_integral needs a positive integer order, got {n}")
    return num_conv(moment_kernel(int(n)), X, X.grid)


def _falling(p, k):
    out = 1.0
    for i in range(k):
        out *= p - i
    return out


@functools.lru_cache(maxsize=64)
def _stencil(offsets, order):
    """Finite-difference weights of d^order/dx^order at 0 on integer ``offsets``."""
    size = len(offsets)
    powers = np.vander(np.asarray(offsets, dtype=float), size, increasing=True).T
    rhs = np.zeros(size)
    rhs[order] = math.factorial(order)
    weights = np.linalg.solve(powers, rhs)
    weights.flags.writeable = False
    return weights


def _derivative_samples(values, order, step):
    """
    Second-order accurate derivative of uniform samples: centred stencils in
    the interior, one-sided stencils of order + 2 points at both ends.
    """
    size = len(values)
    half = order // 2 if order % 2 == 0 else (order + 1) // 2
    edge = order + 2
    out = np.empty(size)
    centre = _stencil(tuple(range(-half, half + 1)), order)
    out[half: size - half] = np.correlate(values, centre, mode="valid")
    for i in range(half):
        out[i] = _stencil(tuple(range(-i, edge - i)), order) @ values[:edge]
        j = size - 1 - i
        out[j] = _stencil(tuple(range(i + 1 - edge, i + 1)), order) @ values[size - edge:]
    return out / step ** order


def differentiate(f, order):
    """
    Classical derivative of order ``order`` of a sampled function.

    With f = t^p g, the Leibniz rule gives
    f^(n) = t^(p-n) Σ_k C(n,k) p(p-1)..(p-n+k+1) t^k g^(k). The derivatives of
    g come from second-order finite-difference stencils, one-sided near the
    ends. Non-negative integer exponents below ``order`` are folded into g
    first, which gives exponent 0.
    """
    if int(order) != order or order < 0:
        raise DomainError(f"derivative order must be a non-negative integer, got {order}")
    order = int(order)
    if order == 0:
        return f
    grid = f.grid
    t = grid.nodes
    p = f.p
    g = np.asarray(f.smooth_values)
    if is_integer(p) and round(p) < order:
        g = np.power(t, round(p)) * g
        p = 0.0
    elif p - order <= -1:
        raise DomainError(f"derivative of order {order} of {f.label or 'function'} "
                          f"with exponent {p:g} is not locally integrable")

    derivs = [g] + [_derivative_samples(g, k, grid.step) for k in range(1, order + 1)]
    if p == 0.0:
        return SampledFunction(grid, 0.0, derivs[order], label=f"d{order}({f.label})")
    smooth = np.zeros_like(g)
    for k in range(order + 1):
        smooth += math.comb(order, k) * _falling(p, order - k) * np.power(t, k) * derivs[k]
    return SampledFunction(grid, p - order, smooth, label=f"d{order}({f.label})")


class Verdict(enum.Enum):
    Pass = "pass"
    Fail = "fail"


@dataclass(frozen=True)
class Tolerance:
    """
    Verdict rule of a residual check.

    A case passes when its residual on the base grid is at most ``abs_tol``
    and halving the step shrinks it at an empirical order of at least
    ``min_order``. Residuals at or below ``floor`` on both grids pass as exact.
    """

    abs_tol: float = PAIR_TOL
    min_order: float = MIN_ORDER
    floor: float = ROUNDOFF_FLOOR

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.floor >= 0):
            raise DomainError("tolerance needs abs_tol > 0 and floor >= 0")


@dataclass(frozen=True)
class ResidualReport:
    """Sup-norm residual of an identity over [eps, T] with refinement evidence."""

    sup_residual: float
    argmax_t: float
    residual_halved_step: float
    estimated_order: float
    verdict: Verdict
    key: str = ""
    theorem: str = ""
    pair: str = ""
    function: str = ""
    step: float = math.nan
    eps: float = math.nan
    tolerance: float = math.nan
    error_constant: float = math.nan
    residual_at_1: float = math.nan
    gating: bool = True
    note: str = ""

    def __post_init__(self):
        assert self.sup_residual >= 0 or math.isnan(self.sup_residual), "negative sup residual"

    @property
    def passed(self):
        return self.verdict is Verdict.Pass

    @property
    def extrapolated_error(self):
        if math.isnan(self.error_constant):
            return math.nan
        return 5.0 * self.error_constant * self.step ** self.estimated_order

    def as_row(self):
        row = dataclasses.asdict(self)
        row["verdict"] = self.verdict.value
        return row


def failed_report(note, **labels):
    nan = math.nan
    return ResidualReport(nan, nan, nan, nan, Verdict.Fail, note=note, **labels)


def sup_residual(residual, grid, eps):
    """Sup of |residual| over [eps, T] and the point where it is attained."""
    residual = np.abs(np.asarray(residual, dtype=float))
    if residual.shape != (grid.J,):
        raise DomainError(f"residual must have {grid.J} samples, got {residual.shape}")
    if not np.all(np.isfinite(residual)):
        raise EvaluationError("residual is not finite")
    mask = grid.window(eps)
    inside = np.where(mask, residual, -1.0)
    j = int(np.argmax(inside))
    return float(inside[j]), float(grid.points[j])


def convergence_report(residual_fn: Callable, grid: Grid, eps: float,
                       tolerance: Optional[Tolerance] = None, **labels):
    """
    Evaluate ``residual_fn(grid)`` (residual at t_1..t_J) on ``grid`` and on its
    halved-step refinement over the same window [eps, T], and apply ``tolerance``.
    """
    tolerance = tolerance or Tolerance()
    coarse = residual_fn(grid)
    sup, argmax_t = sup_residual(coarse, grid, eps)
    at_1 = math.nan
    if eps <= 1.0 <= grid.T:
        try:
            at_1 = float(abs(np.asarray(coarse)[grid.index(1.0) - 1]))
        except DomainError:
            pass
    fine_grid = grid.refined()
    sup_fine, _ = sup_residual(residual_fn(fine_grid), fine_grid, eps)

    order = math.nan
    constant = math.nan
    exact = sup <= tolerance.floor and sup_fine <= tolerance.floor
    if sup > 0 and sup_fine > 0:
        order = math.log2(sup / sup_fine)
        constant = sup / grid.step ** order
    passed = exact or (sup <= tolerance.abs_tol and order >= tolerance.min_order)
    note = labels.pop("note", "")
    if exact and not note:
        note = "exact to roundoff"
    report = ResidualReport(sup, argmax_t, sup_fine, order,
                            Verdict.Pass if passed else Verdict.Fail,
                            step=grid.step, eps=eps, tolerance=tolerance.abs_tol,
                            error_constant=constant, residual_at_1=at_1, note=note, **labels)
    logger.info("%s: sup=%.3e at t=%.4g, halved=%.3e, order=%.2f -> %s", labels.get("key", "check"),
                sup, argmax_t, sup_fine, order, report.verdict.value)
    return report
