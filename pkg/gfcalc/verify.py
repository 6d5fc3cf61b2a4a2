"""
The four fundamental theorems of the general fractional calculus as
residual checks.

Each check evaluates both sides of its identity on a grid and on the
halved-step grid and returns a :class:`~gfcalc.conv.ResidualReport`.
Function-space hypotheses that cannot be tested numerically are met by
construction: the first theorem for the Caputo derivative acts on
``X = N * Y`` and the second theorem for the Riemann-Liouville derivative
acts on ``X = M * Y``.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .algebra import KernelPair, atomic_pair, build_multiset, build_Tn, build_Tnm, build_Tnml
from .conv import Grid, Tolerance, convergence_report, failed_report, num_conv
from .operators import TestFunction, gfd_caputo, gfd_rl, gfi
from .utils import DEFAULT_EPS_FACTOR, DomainError, GFCalcError, THEOREM_TOL

logger = logging.getLogger(__name__)

# window for functions with a singular factor, in grid steps
RELAXED_EPS_FACTOR = 40


class Theorem(enum.Enum):
    FT1_Caputo = "ft1-caputo"
    FT2_Caputo = "ft2-caputo"
    FT1_RL = "ft1-rl"
    FT2_RL = "ft2-rl"


class Admissibility(enum.Enum):
    """How the test function meets the hypothesis of its theorem."""

    Declared = "declared"
    ImageOfN = "image-of-N"
    ImageOfM = "image-of-M"


@dataclass(frozen=True)
class FTCase:
    pair: KernelPair
    function: TestFunction
    theorem: Theorem
    grid: Grid
    admissibility: Admissibility
    eps: float
    gating: bool = True
    rl_path: str = "auto"

    def __post_init__(self):
        if self.theorem is Theorem.FT1_Caputo:
            assert self.admissibility is Admissibility.ImageOfN
        if self.theorem is Theorem.FT2_RL:
            assert self.admissibility is Admissibility.ImageOfM

    @property
    def key(self):
        return f"{self.theorem.value}|{self.pair.label}|{self.function.name}"

    @property
    def labels(self):
        return dict(key=self.key, theorem=self.theorem.value, pair=self.pair.label,
                    function=self.function.name, gating=self.gating)


def make_case(pair, function, theorem, grid, eps=None, gating=True, rl_path="auto"):
    """Case with the admissible construction its theorem calls for."""
    theorem = Theorem(theorem)
    if eps is None:
        factor = RELAXED_EPS_FACTOR if function.exponent < 0 else DEFAULT_EPS_FACTOR
        eps = factor * grid.step
    admissibility = {
        Theorem.FT1_Caputo: Admissibility.ImageOfN,
        Theorem.FT2_RL: Admissibility.ImageOfM,
    }.get(theorem, Admissibility.Declared)
    return FTCase(pair, function, theorem, grid, admissibility, eps, gating, rl_path)


def _report(case, residual):
    return convergence_report(residual, case.grid, case.eps, Tolerance(THEOREM_TOL),
                              **case.labels)


def verify_ft1_caputo(case):
    """D*_(N) I_(M) X = X for X = N * Y."""
    pair, Y = case.pair, case.function

    def residual(grid):
        X = num_conv(pair.N, Y.sample(grid), grid)
        return (gfd_caputo(pair, gfi(pair, X, grid), grid) - X).values()

    return _report(case, residual)


def verify_ft2_caputo(case):
    """I_(M) D*_(N) X = X - Σ_{k<n} X^{(k)}(0) h_{k+1}."""
    pair, X = case.pair, case.function
    n = pair.order_n
    if not X.in_Cn(n):
        raise DomainError(f"{X.name} is not declared in C^{n}_(-1)")
    if len(X.initial_values) < n:
        raise DomainError(f"{X.name}: missing initial values for order {n}")

    def residual(grid):
        lhs = gfi(pair, gfd_caputo(pair, X, grid), grid).values()
        rhs = X(grid.points) - X.taylor(n, grid.points)
        return lhs - rhs

    return _report(case, residual)


def verify_ft1_rl(case):
    """D_(N) I_(M) X = X."""
    pair, X = case.pair, case.function

    def residual(grid):
        lhs = gfd_rl(pair, gfi(pair, X, grid), grid, path=case.rl_path)
        return (lhs - X.sample(grid)).values()

    return _report(case, residual)


def verify_ft2_rl(case):
    """I_(M) D_(N) X = X for X = M * Y."""
    pair, Y = case.pair, case.function

    def residual(grid):
        X = num_conv(pair.M, Y.sample(grid), grid)
        return (gfi(pair, gfd_rl(pair, X, grid, path=case.rl_path), grid) - X).values()

    return _report(case, residual)


VERIFIERS = {
    Theorem.FT1_Caputo: verify_ft1_caputo,
    Theorem.FT2_Caputo: verify_ft2_caputo,
    Theorem.FT1_RL: verify_ft1_rl,
    Theorem.FT2_RL: verify_ft2_rl,
}


def run_case(case):
    """Run one case; library errors become failed reports."""
    try:
        return VERIFIERS[case.theorem](case)
    except GFCalcError as exc:
        logger.info("%s: %s: %s", case.key, type(exc).__name__, exc)
        return failed_report(f"{type(exc).__name__}: {exc}", step=case.grid.step,
                             eps=case.eps, tolerance=THEOREM_TOL, **case.labels)


def run_suite(pairs, functions, grid, theorems=None, gating=True,
              eps_factor=None, workers=None, rl_path="auto"):
    """
    Every theorem for every (pair, function) combination.

    Cases run on a thread pool and come back sorted by case key. A failing
    case never aborts the suite.
    """
    theorems = [Theorem(t) for t in (theorems or list(Theorem))]
    cases = []
    for pair in pairs:
        for function in functions:
            for theorem in theorems:
                eps = None
                if eps_factor is not None and function.exponent >= 0:
                    eps = eps_factor * grid.step
                cases.append(make_case(pair, function, theorem, grid, eps, gating, rl_path))
    if not cases:
        return []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        reports = list(pool.map(run_case, cases))
    reports.sort(key=lambda r: r.key)
    passed = sum(r.passed for r in reports)
    logger.info("suite: %d/%d cases passed", passed, len(reports))
    return reports


def catalog_suite(grid, include_informational=False, theorems=None, eps_factor=None,
                  workers=None, pairs=None, functions=None):
    """
    The gating catalog, plus the informational cases when asked.

    ``pairs`` and ``functions`` filter the catalogs by label and name.
    """
    def keep(items, names, name_of):
        return [x for x in items if names is None or name_of(x) in names]

    gp = keep(default_pairs(), pairs, lambda p: p.label)
    gf = keep(default_functions(), functions, lambda f: f.name)
    reports = run_suite(gp, gf, grid, theorems, True, eps_factor, workers)
    if include_informational:
        ip = keep(informational_pairs(), pairs, lambda p: p.label)
        inf = keep(informational_functions(), functions, lambda f: f.name)
        reports += run_suite(ip, gf + inf, grid, theorems, False, eps_factor, workers)
        reports += run_suite(gp, inf, grid, theorems, False, eps_factor, workers)
        reports.sort(key=lambda r: r.key)
    return reports


def _named(pair, label):
    return dataclasses.replace(pair, label=label)


def default_pairs():
    """Gating pair catalog, one pair per kernel family and construction."""
    return [
        atomic_pair(*kernels.sonine_pair_power(0.5), label="power(0.5)"),
        atomic_pair(*kernels.sonine_pair_tempered(0.3, 1.0), label="tempered(0.3,1)"),
        atomic_pair(*kernels.sonine_pair_kummer(0.4, 0.7, 2.0), label="kummer(0.4,0.7,2)"),
        atomic_pair(*kernels.bessel_pair(2, 0.5), order_n=2, label="bessel2(0.5)"),
        _named(build_Tn([kernels.sonine_pair_power(0.3), kernels.sonine_pair_tempered(0.4, 1.0)]),
               "tn(power(0.3),tempered(0.4,1))"),
    ]


def informational_pairs():
    """Third-order and endpoint constructions; reported, never gating."""
    power = atomic_pair(*kernels.sonine_pair_power(0.5), label="power(0.5)")
    power3 = atomic_pair(*kernels.sonine_pair_power(0.3), label="power(0.3)")
    bessel2 = atomic_pair(*kernels.bessel_pair(2, 0.5), order_n=2, label="bessel2(0.5)")
    return [
        _named(build_Tnml(power, 3, 2), "tnml(power(0.5),3,2)"),
        _named(build_Tnm(power, 2), "tnm(power(0.5),2)"),
        _named(build_Tnml(atomic_pair(*kernels.sonine_pair_power(0.4)), 2, 2),
               "tnml(power(0.4),2,2)"),
        _named(build_multiset([bessel2, power], 3), "multiset(bessel2(0.5),power(0.5))"),
        _named(build_Tn([power3.swapped(), kernels.sonine_pair_tempered(0.4, 1.0)]),
               "tn(power(0.3)~,tempered(0.4,1))"),
    ]


def _zeros(t):
    return np.zeros_like(t)


def _ones(t):
    return np.ones_like(t)


def _identity(t):
    return np.asarray(t, dtype=float)


def _constant(c):
    return lambda t: np.full_like(t, c)


def _one():
    return TestFunction("one", _ones, derivatives=(_zeros,) * 4, initial_values=(1.0, 0, 0, 0, 0))


def _t():
    return TestFunction("t", _identity, derivatives=(_ones,) + (_zeros,) * 3,
                        initial_values=(0.0, 1.0, 0, 0, 0))


def _t2():
    return TestFunction("t2", lambda t: t * t,
                        derivatives=(lambda t: 2.0 * t, _constant(2.0), _zeros, _zeros),
                        initial_values=(0.0, 0.0, 2.0, 0, 0))


def _exp():
    return TestFunction("exp", np.exp, derivatives=(np.exp,) * 4, initial_values=(1.0,) * 5)


def _cos():
    return TestFunction("cos", np.cos,
                        derivatives=(lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin, np.cos),
                        initial_values=(1.0, 0.0, -1.0, 0.0, 1.0))


def _sin():
    return TestFunction("sin", np.sin,
                        derivatives=(np.cos, lambda t: -np.sin(t), lambda t: -np.cos(t), np.sin),
                        initial_values=(0.0, 1.0, 0.0, -1.0, 0.0))


def _zero():
    return TestFunction("zero", _zeros, derivatives=(_zeros,) * 4, initial_values=(0.0,) * 5)


def _h06():
    return TestFunction("h06", _constant(1.0 / math.gamma(0.6)), exponent=-0.4)


_DEFAULT_FUNCTIONS = {"one": _one, "t": _t, "exp": _exp, "cos": _cos}
_INFORMATIONAL_FUNCTIONS = {"t2": _t2, "h06": _h06, "sin": _sin, "zero": _zero}


def default_functions():
    return [make() for make in _DEFAULT_FUNCTIONS.values()]


def informational_functions():
    return [make() for make in _INFORMATIONAL_FUNCTIONS.values()]


def function_names():
    return list(_DEFAULT_FUNCTIONS) + list(_INFORMATIONAL_FUNCTIONS)


def catalog_function(name):
    """Catalog test function by name."""
    make = _DEFAULT_FUNCTIONS.get(name) or _INFORMATIONAL_FUNCTIONS.get(name)
    if make is None:
        raise DomainError(f"unknown test function {name!r}; known: {', '.join(function_names())}")
    return make()


def summarize(reports):
    """Counts of passing and failing gating and informational reports."""
    out = {"gating_passed": 0, "gating_failed": 0, "informational_passed": 0,
           "informational_failed": 0}
    for r in reports:
        prefix = "gating" if r.gating else "informational"
        out[f"{prefix}_{'passed' if r.passed else 'failed'}"] += 1
    return out


def all_gating_passed(reports):
    return all(r.passed for r in reports if r.gating)
