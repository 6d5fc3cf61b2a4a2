import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from gfcalc import specfun
from gfcalc.utils import AccuracyWarning, DomainError, EvaluationError


@pytest.mark.parametrize(("value", "oracle"), [
    (lambda: specfun.gamma_lower(0.5, 1.0), math.sqrt(math.pi) * math.erf(1.0)),
    (lambda: specfun.kummer_phi(1.0, 2.0, 1.0), math.e - 1.0),
    (lambda: specfun.bessel_j(0.5, 1.0), math.sqrt(2.0 / math.pi) * math.sin(1.0)),
    (lambda: specfun.gamma_fn(0.5), math.sqrt(math.pi)),
], ids=["gamma_lower", "kummer", "bessel_j", "gamma"])
def test_unit_oracles(value, oracle):
    assert value() == pytest.approx(oracle, rel=1e-10)


@pytest.mark.parametrize("x", [0.05, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.7, 7.0, 12.25, 40.5, 100.0])
def test_gamma_matches_math(x):
    assert specfun.gamma_fn(x) == pytest.approx(math.gamma(x), rel=1e-12)


def test_gamma_integers_are_factorials():
    for n in range(1, 20):
        assert specfun.gamma_fn(n) == math.factorial(n - 1)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=50.0))
def test_gamma_recurrence(x):
    assert specfun.gamma_fn(x + 1.0) == pytest.approx(x * specfun.gamma_fn(x), rel=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        specfun.gamma_fn(x)


def test_gamma_overflow():
    with pytest.raises(EvaluationError):
        specfun.gamma_fn(172.0)


def test_beta():
    assert specfun.beta_fn(0.3, 0.7) == pytest.approx(math.gamma(0.3) * math.gamma(0.7), rel=1e-13)
    assert specfun.beta_fn(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-14)


@pytest.mark.parametrize("beta", [0.3, 0.5, 0.7, 1.0, 2.5])
def test_gamma_lower_against_scipy(beta):
    t = np.concatenate([[0.0], np.linspace(0.01, 30.0, 301)])
    expected = special.gammainc(beta, t) * special.gamma(beta)
    np.testing.assert_allclose(specfun.gamma_lower(beta, t), expected, rtol=1e-10, atol=1e-300)


def test_gamma_lower_scalar_and_domain():
    assert isinstance(specfun.gamma_lower(0.5, 2.0), float)
    assert specfun.gamma_lower(0.5, 0.0) == 0.0
    with pytest.raises(DomainError):
        specfun.gamma_lower(0.0, 1.0)
    with pytest.raises(DomainError):
        specfun.gamma_lower(0.5, -1.0)


@pytest.mark.parametrize(("beta", "alpha"), [(0.7, 0.4), (-0.7, 0.6), (1.0, 2.0), (0.5, 1.5)],
                         ids=["mu", "nu", "exp", "half"])
def test_kummer_against_scipy(beta, alpha):
    z = np.linspace(-10.0, 3.0, 131)
    np.testing.assert_allclose(specfun.kummer_phi(beta, alpha, z), special.hyp1f1(beta, alpha, z),
                               rtol=1e-9, atol=1e-13)


def test_kummer_reduces_to_exponential():
    z = np.linspace(-5.0, 5.0, 21)
    np.testing.assert_allclose(specfun.kummer_phi(0.4, 0.4, z), np.exp(z), rtol=1e-12)


def test_kummer_nonpositive_integer_alpha():
    with pytest.raises(DomainError):
        specfun.kummer_phi(0.5, -2.0, 1.0)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5, 1.5, 2.5])
def test_bessel_against_scipy(alpha):
    t = np.linspace(0.05, 10.0, 200)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AccuracyWarning)
        j = specfun.bessel_j(alpha, t)
        i = specfun.bessel_i(alpha, t)
    np.testing.assert_allclose(j, special.jv(alpha, t), rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(i, special.iv(alpha, t), rtol=1e-10)


def test_bessel_series_is_entire_part():
    t = np.linspace(0.1, 4.0, 40)
    nu = 0.3
    factored = (0.5 * t) ** nu * specfun.bessel_series(nu, -0.25 * t * t)
    np.testing.assert_allclose(factored, special.jv(nu, t), rtol=1e-10, atol=1e-13)


def test_bessel_terms_sum_to_value():
    terms = specfun.bessel_terms(1.5, 2.0, 30)
    assert terms.sum() == pytest.approx(special.jv(1.5, 2.0), rel=1e-12)
    terms = specfun.bessel_terms(1.5, 2.0, 30, modified=True)
    assert terms.sum() == pytest.approx(special.iv(1.5, 2.0), rel=1e-12)


def test_bessel_cancellation_is_flagged():
    with pytest.warns(AccuracyWarning):
        result = specfun.bessel_j(0.5, 40.0, full_output=True)
    assert not result.accurate
    assert result.lost_digits > specfun.MAX_LOST_DIGITS


def test_bessel_full_output_metadata():
    result = specfun.bessel_i(0.5, 1.0, full_output=True)
    assert result.accurate
    assert result.terms > 1
    assert result.value == pytest.approx(special.iv(0.5, 1.0), rel=1e-12)


@pytest.mark.parametrize(("alpha", "t"), [(-1.0, 1.0), (-0.5, 0.0), (0.5, -1.0)],
                         ids=["order", "origin", "negative-t"])
def test_bessel_domain(alpha, t):
    with pytest.raises(DomainError):
        specfun.bessel_j(alpha, t)


def test_series_policy():
    with pytest.raises(DomainError):
        specfun.SeriesPolicy(rel_term_tol=0.0)
    with pytest.raises(DomainError):
        specfun.SeriesPolicy(max_terms=0)
    with pytest.raises(EvaluationError):
        specfun.kummer_phi(1.0, 2.0, 5.0, policy=specfun.SeriesPolicy(max_terms=3))


# Γ at rational points, 34 significant digits
GAMMA_REFERENCE = [
    (1 / 6, "5.566316001780235204250096895207726"),
    (1 / 5, "4.590843711998803053204758275929152"),
    (1 / 4, "3.625609908221908311930685155867672"),
    (1 / 3, "2.678938534707747633655692940974677"),
    (1 / 2, "1.772453850905516027298167483341145"),
    (2 / 3, "1.354117939426400416945288028154513"),
    (3 / 4, "1.225416702465177645129098303362890"),
    (7 / 6, "0.9277193336300392007083494825346210"),
    (6 / 5, "0.9181687423997606106409516551858304"),
    (5 / 4, "0.9064024770554770779826712889669180"),
    (4 / 3, "0.8929795115692492112185643136582257"),
    (3 / 2, "0.8862269254527580136490837416705725"),
    (5 / 3, "0.9027452929509336112968586854363420"),
    (7 / 4, "0.9190625268488832338468237275221675"),
    (5 / 2, "1.329340388179137020473625612505859"),
    (7 / 2, "3.323350970447842551184064031264647"),
    (9 / 2, "11.63172839656744892914422410942626"),
    (11 / 2, "52.34277778455352018114900849241819"),
    (13 / 2, "287.8852778150443609963195467083000"),
    (15 / 2, "1871.254305797788346476077053603950"),
]


@pytest.mark.parametrize(("x", "reference"), GAMMA_REFERENCE, ids=[f"{x:.4f}" for x, _ in GAMMA_REFERENCE])
def test_gamma_reference_values(x, reference):
    assert specfun.gamma_fn(x) == pytest.approx(float(reference), rel=1e-13)


@pytest.mark.parametrize("beta", [0.3, 0.7, 1.5])
@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_gamma_lower_recurrence(beta, t):
    upper = specfun.gamma_lower(beta + 1.0, t)
    lowered = beta * specfun.gamma_lower(beta, t) - t ** beta * math.exp(-t)
    assert abs(upper - lowered) <= 1e-10 * (1.0 + abs(upper))


@pytest.mark.parametrize("beta", [0.3, 0.7, 1.5, 4.0])
def test_gamma_lower_is_monotone(beta):
    values = specfun.gamma_lower(beta, np.linspace(0.0, 20.0, 2001))
    assert np.all(np.diff(values) >= 0.0)
    assert values[-1] <= specfun.gamma_fn(beta) * (1.0 + 1e-15)


def test_gamma_lower_policy_reaches_continued_fraction():
    with pytest.raises(EvaluationError, match="continued fraction"):
        specfun.gamma_lower(0.5, 30.0, policy=specfun.SeriesPolicy(max_terms=2))


@pytest.mark.parametrize("alpha", [0.4, 1.0, 2.5])
def test_kummer_reduction(alpha):
    z = np.linspace(-3.0, 3.0, 61)
    assert np.all(np.abs(specfun.kummer_phi(alpha, alpha, z) - np.exp(z)) <= 1e-12 * np.exp(z))


@pytest.mark.parametrize("alpha", [-0.5, 0.3, 1.5, 3.0])
@pytest.mark.parametrize("t", [0.5, 2.0, 7.0])
def test_modified_bessel_terms_are_absolute_bessel_terms(alpha, t):
    j = specfun.bessel_terms(alpha, t, 21)
    i = specfun.bessel_terms(alpha, t, 21, modified=True)
    np.testing.assert_array_equal(i, np.abs(j))
    assert np.all(j[::2] >= 0) and np.all(j[1::2] <= 0)
