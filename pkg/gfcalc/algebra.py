"""
Kernel expressions and the constructions of Luchko pairs.

Expressions are flat, canonically ordered convolution products of atomic
kernels, so equal products compare and hash equal. Pairs record how they
were built; the builders mirror the subsets T_n, T_{n,m}, T_{n,m,l} and
their multiset generalizations.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from .kernels import Family, Kernel, moment_kernel, power_kernel, tempered_power_kernel
from .utils import DEFAULT_EPS_FACTOR, DEFAULT_STEP, DEFAULT_T, DomainError, PAIR_TOL

logger = logging.getLogger(__name__)

# self-certify every constructed pair with check_pair
DEBUG = False
DEBUG_T = 2.0
DEBUG_STEP = 1.0 / 256


@dataclass(frozen=True)
class KernelExpr:
    """Convolution product of one or more atomic kernels."""

    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise DomainError("a kernel expression needs at least one factor")
        assert all(isinstance(f, Kernel) for f in self.factors), "factors must be atomic kernels"

    @property
    def is_leaf(self):
        return len(self.factors) == 1

    @property
    def cached_p(self):
        return sum(f.p for f in self.factors) + (len(self.factors) - 1)

    @property
    def label(self):
        return " * ".join(f.label for f in self.factors)

    @property
    def key(self):
        return tuple(f.key for f in self.factors)

    def __str__(self):
        return self.label


def leaf(kernel):
    return KernelExpr((kernel,))


def _flatten(factors):
    for item in factors:
        if isinstance(item, KernelExpr):
            yield from item.factors
        elif isinstance(item, Kernel):
            yield item
        elif isinstance(item, (list, tuple)):
            yield from _flatten(item)
        else:
            raise DomainError(f"cannot convolve {type(item).__name__}")


def conv_expr(factors):
    """
    Flattened, canonically ordered convolution of ``factors``.

    Accepts kernels and expressions; a single factor comes back as a leaf.
    """
    flat = sorted(_flatten(factors), key=lambda k: k.key)
    if not flat:
        raise DomainError("conv_expr needs at least one factor")
    expr = KernelExpr(tuple(flat))
    assert expr.cached_p > -1
    return expr


def _order_of(kernel):
    if kernel.family is Family.Moment:
        return kernel.param("k")
    return kernel.param("a")


def simplify(expr):
    """
    Merge the factors that have a closed-form product.

    Power and Moment leaves merge by h_a * h_b = h_{a+b}; the result is a
    moment kernel when every merged leaf is one. Tempered leaves with a
    common λ merge the same way. Other leaves are kept as they are.
    """
    if isinstance(expr, Kernel):
        return leaf(expr)
    if expr.is_leaf:
        return expr
    powers, tempered, rest = [], {}, []
    for f in expr.factors:
        if f.family in (Family.Power, Family.Moment):
            powers.append(f)
        elif f.family is Family.Tempered and f.role == "mu":
            tempered.setdefault(f.param("lambda"), []).append(f)
        else:
            rest.append(f)

    merged = list(rest)
    if len(powers) > 1:
        total = sum(_order_of(f) for f in powers)
        if all(f.family is Family.Moment for f in powers):
            merged.append(moment_kernel(round(total)))
        else:
            merged.append(power_kernel(total))
    else:
        merged.extend(powers)
    for lam, group in tempered.items():
        if len(group) > 1:
            merged.append(tempered_power_kernel(sum(f.param("a") for f in group), lam))
        else:
            merged.extend(group)
    out = conv_expr(merged)
    if out != expr:
        logger.debug("simplified %s -> %s", expr.label, out.label)
    return out


class Provenance(enum.Enum):
    Atomic = "atomic"
    T_n = "tn"
    T_nm = "tnm"
    T_nml = "tnml"
    T_n_multiset = "multiset"
    T_n_multiset_l = "multiset-l"


@dataclass(frozen=True)
class KernelPair:
    """
    Kernel pair (M, N) claimed to satisfy M * N = h_n.

    :param order_n: the order n
    :type order_n: int
    :param provenance: construction that produced the pair
    :type provenance: Provenance
    :param m: order of the base pair, or the summed base order for multisets with ``l``
    :param l: split index of T_{n,m,l} constructions
    :param m_js: orders of the base pairs of a multiset construction
    """

    M: KernelExpr
    N: KernelExpr
    order_n: int
    provenance: Provenance = Provenance.Atomic
    m: Optional[int] = None
    l: Optional[int] = None
    m_js: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if int(self.order_n) != self.order_n or self.order_n < 1:
            raise DomainError(f"pair order must be a positive integer, got {self.order_n}")
        n = self.order_n
        if self.provenance is Provenance.T_nm and not 1 <= self.m <= n:
            raise DomainError(f"T_nm needs 1 <= m <= n, got m={self.m}, n={n}")
        if self.provenance is Provenance.T_nml and not (1 <= self.m <= self.l <= n):
            raise DomainError(f"T_nml needs 1 <= m <= l <= n, got m={self.m}, l={self.l}, n={n}")
        if self.provenance is Provenance.T_n_multiset and sum(self.m_js) != n:
            raise DomainError(f"multiset orders {self.m_js} do not sum to n={n}")
        if self.provenance is Provenance.T_n_multiset_l:
            if sum(self.m_js) != self.m:
                raise DomainError(f"multiset orders {self.m_js} do not sum to {self.m}")
            if not self.m <= self.l <= n:
                raise DomainError(f"multiset split needs {self.m} <= l <= {n}, got l={self.l}")
        if not self.label:
            object.__setattr__(self, "label", f"[{self.M.label}, {self.N.label}]")

    @property
    def product_p(self):
        """Singular exponent of M * N; n - 1 for a genuine pair."""
        return self.M.cached_p + self.N.cached_p + 1.0

    def swapped(self):
        """The pair (N, M); the Luchko condition is symmetric."""
        return KernelPair(self.N, self.M, self.order_n, self.provenance, self.m, self.l, self.m_js)

    def __str__(self):
        return self.label


def _as_expr(item):
    if isinstance(item, KernelExpr):
        return item
    return conv_expr([item])


def atomic_pair(mu, nu, order_n=1, label=""):
    """Wrap two kernels, or kernel expressions, as a pair of the given order."""
    return KernelPair(_as_expr(mu), _as_expr(nu), order_n, label=label)


def _certified(pair):
    if DEBUG:
        report = check_pair(pair, DEBUG_T, DEBUG_STEP)
        if not report.passed:
            logger.warning("constructed pair %s failed certification: sup=%.3e at t=%.4g",
                           pair.label, report.sup_residual, report.argmax_t)
    return pair


def _sonine_members(item):
    if isinstance(item, KernelPair):
        if item.order_n != 1:
            raise DomainError(f"build_Tn needs Sonine pairs, got order {item.order_n}")
        return item.M, item.N
    mu, nu = item
    return mu, nu


def build_Tn(sonine_pairs):
    """Pair of order n from n Sonine pairs: M = μ_1*...*μ_n, N = ν_1*...*ν_n."""
    members = [_sonine_members(item) for item in sonine_pairs]
    if not members:
        raise DomainError("build_Tn needs at least one Sonine pair")
    M = conv_expr([mu for mu, _ in members])
    N = conv_expr([nu for _, nu in members])
    return _certified(KernelPair(M, N, len(members), Provenance.T_n))


def build_Tnm(base, n):
    """Pair of order n from a pair of order m: M = {1}^{n-m} * M_base, N = N_base."""
    m = base.order_n
    if int(n) != n or n < m:
        raise DomainError(f"build_Tnm needs an integer n >= m={m}, got n={n}")
    n = int(n)
    if n == m:
        return base
    M = conv_expr([moment_kernel(n - m), base.M])
    return _certified(KernelPair(M, base.N, n, Provenance.T_nm, m=m))


def build_Tnml(base, n, l):
    """
    Pair of order n with the moment kernels split between the members:
    M = {1}^{n-l} * M_base and N = {1}^{l-m} * N_base.
    """
    m = base.order_n
    if int(n) != n or int(l) != l or not m <= l <= n:
        raise DomainError(f"build_Tnml needs m <= l <= n, got m={m}, l={l}, n={n}")
    n, l = int(n), int(l)
    if l == m:
        return build_Tnm(base, n)
    M = conv_expr([moment_kernel(n - l), base.M]) if n > l else base.M
    N = conv_expr([moment_kernel(l - m), base.N])
    return _certified(KernelPair(M, N, n, Provenance.T_nml, m=m, l=l))


def build_multiset(bases, n, l=None):
    """
    Pair of order n from pairs of orders m_1, ..., m_k.

    Without ``l`` the orders must sum to n. With ``l`` they sum to some
    η <= l <= n, and the moment kernels {1}^{n-l} and {1}^{l-η} fill up
    M and N.
    """
    bases = list(bases)
    if not bases:
        raise DomainError("build_multiset needs at least one base pair")
    m_js = tuple(b.order_n for b in bases)
    eta = sum(m_js)
    Ms = [b.M for b in bases]
    Ns = [b.N for b in bases]
    if l is None:
        if eta != n:
            raise DomainError(f"base orders {m_js} sum to {eta}, not n={n}")
        return _certified(KernelPair(conv_expr(Ms), conv_expr(Ns), n, Provenance.T_n_multiset,
                                     m_js=m_js))
    if not eta <= l <= n:
        raise DomainError(f"build_multiset needs {eta} <= l <= n={n}, got l={l}")
    if n > l:
        Ms.append(moment_kernel(n - l))
    if l > eta:
        Ns.append(moment_kernel(l - eta))
    return _certified(KernelPair(conv_expr(Ms), conv_expr(Ns), n, Provenance.T_n_multiset_l,
                                 m=eta, l=l, m_js=m_js))


def check_pair(pair, T=DEFAULT_T, grid_step=DEFAULT_STEP, eps=None, tolerance=None):
    """
    Numeric evidence for the Luchko condition (M * N)(t) = h_n(t) on [eps, T].

    The residual is measured on the grid and on its halved-step refinement;
    ``eps`` defaults to ``DEFAULT_EPS_FACTOR * grid_step``.
    """
    from . import conv

    grid = conv.Grid(T, grid_step)
    if eps is None:
        eps = DEFAULT_EPS_FACTOR * grid_step
    if not 0 < eps < T:
        raise DomainError(f"check_pair needs T > eps > 0, got T={T}, eps={eps}")
    n = pair.order_n
    scale = 1.0 / math.factorial(n - 1)

    def residual(g):
        product = conv.num_conv(pair.M, pair.N, g)
        return product.values() - scale * g.points ** (n - 1)

    return conv.convergence_report(residual, grid, eps, tolerance or conv.Tolerance(PAIR_TOL),
                                   key=f"luchko-{n}:{pair.label}", theorem=f"luchko-{n}",
                                   pair=pair.label)
