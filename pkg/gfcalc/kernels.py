r"""
Atomic kernel families in factored singular form :math:`t^p g(t)`.

A :class:`Kernel` knows its singular exponent ``p`` exactly and evaluates
its smooth factor ``g`` on ``[0, \infty)``, including ``t = 0``. The
convolution engine relies on both.
"""

from __future__ import annotations

import enum
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import specfun
from .utils import DomainError, check_open_interval, is_integer

logger = logging.getLogger(__name__)


class Family(enum.Enum):
    """Kernel family; the value fixes the canonical ordering of leaves."""

    Power = "power"
    Tempered = "tempered"
    Kummer = "kummer"
    BesselJ = "besselj"
    BesselI = "besseli"
    Moment = "moment"


@dataclass(frozen=True)
class Kernel:
    """
    Atomic kernel ``t**p * g(t)``.

    :param family: kernel family
    :type family: Family
    :param params: ``(name, value)`` pairs fixing the member of the family
    :type params: tuple
    :param p: singular exponent, ``p > -1``
    :type p: float
    :param role: ``"mu"`` or ``"nu"`` for families whose two pair members
        share parameters, empty otherwise
    :type role: str
    :param g: smooth factor, evaluated on numpy arrays with ``t >= 0``
    :type g: callable
    """

    family: Family
    params: tuple
    p: float
    role: str = ""
    g: Callable = field(default=None, compare=False, repr=False)
    has_analytic_derivatives: bool = field(default=False, compare=False)
    label: str = field(default="", compare=False)
    closed_form: Optional[Callable] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.p > -1:
            raise DomainError(f"kernel {self.label or self.family.value} has p={self.p} <= -1")
        assert self.g is not None, "kernel needs a smooth factor"

    @property
    def key(self):
        return (self.family.value, self.role, self.params)

    @property
    def in_C_minus_one_zero(self):
        return -1 < self.p < 0

    def param(self, name):
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    def smooth(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.g(t), t.shape).astype(float)

    def __call__(self, t):
        """Kernel value at ``t > 0``."""
        t = np.asarray(t, dtype=float)
        value = np.power(t, self.p) * self.smooth(t)
        return float(value) if value.ndim == 0 else value

    def derivative(self, j):
        """
        Classical j-th derivative for the Power and Moment families.

        Returns ``None`` when the derivative vanishes identically.
        """
        if not self.has_analytic_derivatives:
            raise DomainError(f"{self.label} has no analytic derivatives")
        if j == 0:
            return self
        order = self.p + 1.0 - j
        if order > 0:
            return power_kernel(order)
        if is_integer(order):
            return None
        raise DomainError(f"derivative {j} of {self.label} is not locally integrable")

    def __str__(self):
        return self.label


def _constant(value, t):
    return np.full(np.shape(t), value, dtype=float)


def _num(x):
    return f"{x:g}"


def power_kernel(a):
    """h_a(t) = t^{a-1}/Γ(a), a > 0."""
    a = float(a)
    if not a > 0:
        raise DomainError(f"power_kernel requires a > 0, got {a}")
    scale = 1.0 / specfun.gamma_fn(a)
    return Kernel(Family.Power, (("a", a),), a - 1.0,
                  g=functools.partial(_constant, scale),
                  has_analytic_derivatives=True,
                  label=f"h_{{{_num(a)}}}",
                  closed_form=lambda t: np.power(t, a - 1.0) / math.gamma(a))


def moment_kernel(k):
    """{1}^k, the k-fold convolution power of the unit function."""
    if int(k) != k or k < 1:
        raise DomainError(f"moment_kernel requires a positive integer, got {k}")
    k = int(k)
    return Kernel(Family.Moment, (("k", float(k)),), k - 1.0,
                  g=functools.partial(_constant, 1.0 / math.factorial(k - 1)),
                  has_analytic_derivatives=True,
                  label=f"{{1}}^{k}",
                  closed_form=lambda t: np.power(t, k - 1.0) / math.factorial(k - 1))


def _tempered_mu(a, lam, t):
    return np.exp(-lam * t) / specfun.gamma_fn(a)


def tempered_power_kernel(a, lam):
    """e^{-λt} h_a(t); reduces to :func:`power_kernel` at λ = 0."""
    a = float(a)
    lam = float(lam)
    if not a > 0:
        raise DomainError(f"tempered kernel requires a > 0, got {a}")
    if lam < 0:
        raise DomainError(f"tempered kernel requires lambda >= 0, got {lam}")
    if lam == 0:
        return power_kernel(a)
    return Kernel(Family.Tempered, (("a", a), ("lambda", lam)), a - 1.0, role="mu",
                  g=functools.partial(_tempered_mu, a, lam),
                  label=f"e^{{-{_num(lam)}t}}h_{{{_num(a)}}}",
                  closed_form=lambda t: np.power(t, a - 1.0) * np.exp(-lam * t) / math.gamma(a))


def _tempered_nu(alpha, lam, t):
    lt = lam * t
    tail = np.power(lt, alpha) * specfun.gamma_lower(1.0 - alpha, lt)
    return (np.exp(-lt) + tail) / specfun.gamma_fn(1.0 - alpha)


def _tempered_nu_closed(alpha, lam, t):
    lt = lam * t
    return (np.power(t, -alpha) * np.exp(-lt)
            + lam ** alpha * specfun.gamma_lower(1.0 - alpha, lt)) / math.gamma(1.0 - alpha)


def sonine_pair_power(alpha):
    """(h_α, h_{1-α}) for 0 < α < 1."""
    alpha = float(alpha)
    check_open_interval("alpha", alpha, 0.0, 1.0)
    return power_kernel(alpha), power_kernel(1.0 - alpha)


def sonine_pair_tempered(alpha, lam):
    """
    Tempered Sonine pair.

    μ(t) = h_α(t) e^{−λt} and
    ν(t) = t^{−α} e^{−λt}/Γ(1−α) + λ^α γ(1−α, λt)/Γ(1−α). ν is stored
    with p = −α, and its additive term is absorbed into the continuous
    smooth factor.
    """
    alpha = float(alpha)
    lam = float(lam)
    check_open_interval("alpha", alpha, 0.0, 1.0)
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if lam == 0:
        return sonine_pair_power(alpha)
    mu = tempered_power_kernel(alpha, lam)
    nu = Kernel(Family.Tempered, (("a", alpha), ("lambda", lam)), -alpha, role="nu",
                g=functools.partial(_tempered_nu, alpha, lam),
                label=f"nu_tempered({_num(alpha)},{_num(lam)})",
                closed_form=functools.partial(_tempered_nu_closed, alpha, lam))
    return mu, nu


def _kummer_factor(scale, b, c, lam, t):
    return scale * specfun.kummer_phi(b, c, -lam * t)


def sonine_pair_kummer(alpha, beta, lam):
    """
    Kummer-function Sonine pair.

    μ(t) = t^{α−1} Φ(β, α; −λt) and
    ν(t) = (sin πα/π) t^{−α} Φ(−β, 1−α; −λt).
    """
    alpha = float(alpha)
    beta = float(beta)
    lam = float(lam)
    check_open_interval("alpha", alpha, 0.0, 1.0)
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    params = (("alpha", alpha), ("beta", beta), ("lambda", lam))
    scale = math.sin(math.pi * alpha) / math.pi
    mu = Kernel(Family.Kummer, params, alpha - 1.0, role="mu",
                g=functools.partial(_kummer_factor, 1.0, beta, alpha, lam),
                label=f"mu_kummer({_num(alpha)},{_num(beta)},{_num(lam)})",
                closed_form=lambda t: np.power(t, alpha - 1.0)
                * specfun.kummer_phi(beta, alpha, -lam * np.asarray(t)))
    nu = Kernel(Family.Kummer, params, -alpha, role="nu",
                g=functools.partial(_kummer_factor, scale, -beta, 1.0 - alpha, lam),
                label=f"nu_kummer({_num(alpha)},{_num(beta)},{_num(lam)})",
                closed_form=lambda t: scale * np.power(t, -alpha)
                * specfun.kummer_phi(-beta, 1.0 - alpha, -lam * np.asarray(t)))
    return mu, nu


def _bessel_factor(nu, sign, t):
    return specfun.bessel_series(nu, sign * np.asarray(t, dtype=float))


def _bessel_closed(prefactor, nu, modified, t):
    t = np.asarray(t, dtype=float)
    fn = specfun.bessel_i if modified else specfun.bessel_j
    return np.power(t, prefactor) * fn(nu, 2.0 * np.sqrt(t))


def _bessel_kernel(family, params, prefactor, nu, modified, label):
    # t^e Z_ν(2√t) = t^{e+ν/2} Σ (±t)^k/(k!Γ(ν+k+1)): exponent from the leading term
    p = prefactor + 0.5 * nu
    return Kernel(family, params, p,
                  g=functools.partial(_bessel_factor, nu, 1.0 if modified else -1.0),
                  label=label,
                  closed_form=functools.partial(_bessel_closed, prefactor, nu, modified))


def bessel_pair(order_n, alpha):
    """
    Bessel-function Luchko pair of order n, for n − 2 < α < n − 1.

    M(t) = t^{α/2} J_α(2√t) for every order. N is
    t^{−1/2−α/2} I_{−α−1}(2√t) for n = 1, t^{−α/2} I_{−α}(2√t) for n = 2,
    and t^{n/2−α/2−1} I_{n−α−2}(2√t) otherwise.
    """
    if int(order_n) != order_n or order_n < 1:
        raise DomainError(f"order must be a positive integer, got {order_n}")
    n = int(order_n)
    alpha = float(alpha)
    check_open_interval("alpha", alpha, n - 2.0, n - 1.0)
    if n == 1:
        prefactor, index = -0.5 - 0.5 * alpha, -alpha - 1.0
    elif n == 2:
        prefactor, index = -0.5 * alpha, -alpha
    else:
        prefactor, index = 0.5 * n - 0.5 * alpha - 1.0, n - alpha - 2.0
    m_kernel = _bessel_kernel(Family.BesselJ, (("alpha", alpha),), 0.5 * alpha, alpha, False,
                              f"M_bessel({_num(alpha)})")
    n_kernel = _bessel_kernel(Family.BesselI, (("alpha", alpha), ("order", float(n))),
                              prefactor, index, True, f"N_bessel({n},{_num(alpha)})")
    return m_kernel, n_kernel


def bessel_n_kernel_general(order_n, alpha):
    """N kernel of the general-order formula, applied at any n including 1 and 2."""
    n = int(order_n)
    alpha = float(alpha)
    check_open_interval("alpha", alpha, n - 2.0, n - 1.0)
    return _bessel_kernel(Family.BesselI, (("alpha", alpha), ("order", float(n))),
                          0.5 * n - 0.5 * alpha - 1.0, n - alpha - 2.0, True,
                          f"N_bessel({n},{_num(alpha)})")


FAMILY_CATALOG = (
    {"family": "power", "kernels": "h_a(t) = t^(a-1)/Gamma(a)",
     "pair": "(h_alpha, h_(1-alpha))", "params": {"alpha": "0 < alpha < 1"}, "order": 1},
    {"family": "tempered", "kernels": "h_alpha(t) exp(-lambda t), t^-alpha exp(-lambda t)/Gamma(1-alpha)"
     " + lambda^alpha gamma(1-alpha, lambda t)/Gamma(1-alpha)",
     "pair": "(mu, nu)", "params": {"alpha": "0 < alpha < 1", "lambda": "lambda >= 0"}, "order": 1},
    {"family": "kummer", "kernels": "t^(alpha-1) Phi(beta, alpha; -lambda t),"
     " sin(pi alpha)/pi t^-alpha Phi(-beta, 1-alpha; -lambda t)",
     "pair": "(mu, nu)", "params": {"alpha": "0 < alpha < 1", "beta": "real", "lambda": "lambda >= 0"},
     "order": 1},
    {"family": "bessel", "kernels": "t^(alpha/2) J_alpha(2 sqrt t), t^(n/2-alpha/2-1) I_(n-alpha-2)(2 sqrt t)",
     "pair": "(M, N)", "params": {"order": "n >= 1", "alpha": "n-2 < alpha < n-1"}, "order": "n"},
    {"family": "moment", "kernels": "{1}^k(t) = t^(k-1)/(k-1)!",
     "pair": "kernel only", "params": {"k": "positive integer"}, "order": None},
)
