import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from gfcalc import conv, kernels
from gfcalc.algebra import conv_expr
from gfcalc.conv import Grid, SampledFunction, Tolerance, Verdict
from gfcalc.utils import DomainError, EvaluationError

h = kernels.power_kernel


@pytest.mark.parametrize(("T", "step"), [(1.0, 0.3), (1.0, 0.25), (-1.0, 0.1), (1.0, 0.0)])
def test_grid_validation(T, step):
    with pytest.raises(DomainError):
        Grid(T, step)


def test_grid(default_grid):
    assert default_grid.J == 2560
    assert default_grid.points[0] == default_grid.step
    assert default_grid.points[-1] == pytest.approx(5.0)
    assert default_grid.refined().J == 5120
    assert default_grid.index(1.0) == 512
    with pytest.raises(DomainError):
        default_grid.index(1.0 + 1e-3)
    with pytest.raises(DomainError):
        default_grid.index(6.0)
    mask = default_grid.window(0.5)
    assert mask.sum() == 2560 - 255
    with pytest.raises(DomainError):
        default_grid.window(5.0)


def test_sampled_function_validation(coarse_grid):
    J = coarse_grid.J
    with pytest.raises(DomainError):
        SampledFunction(coarse_grid, 0.0, np.ones(J))
    with pytest.raises(DomainError):
        SampledFunction(coarse_grid, -1.0, np.ones(J + 1))
    bad = np.ones(J + 1)
    bad[3] = np.nan
    with pytest.raises(EvaluationError):
        SampledFunction(coarse_grid, 0.0, bad)


def test_sampled_function_is_read_only(coarse_grid):
    f = conv.sample(h(0.5), coarse_grid)
    with pytest.raises(ValueError):
        f.smooth_values[0] = 1.0


def test_sampled_function_arithmetic(coarse_grid):
    t = coarse_grid.points
    f = conv.sample(h(0.5), coarse_grid)
    g = SampledFunction(coarse_grid, 0.0, np.cos(coarse_grid.nodes), flags=frozenset({"a"}))
    np.testing.assert_allclose((f + g).values(), h(0.5)(t) + np.cos(t), rtol=1e-13)
    np.testing.assert_allclose((g - f).values(), np.cos(t) - h(0.5)(t), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose((f - g).values(), h(0.5)(t) - np.cos(t), rtol=1e-12, atol=1e-14)
    assert (f + g).p == -0.5
    assert (f + g).flags == {"a"}
    np.testing.assert_allclose((2.0 * g).values(), 2.0 * np.cos(t))
    np.testing.assert_allclose((-g).values(), -np.cos(t))
    assert g.at(1.0) == pytest.approx(math.cos(1.0), rel=1e-15)
    with pytest.raises(DomainError):
        g.at(0.0)
    other = conv.zeros(Grid(2.0, 1.0 / 64))
    with pytest.raises(DomainError):
        g + other


def test_sample_kernel_expression(coarse_grid):
    f = conv.sample(conv_expr([h(0.25), h(0.75)]), coarse_grid)
    assert f.p == 0.0
    np.testing.assert_allclose(f.values(), 1.0, rtol=1e-14)
    with pytest.raises(TypeError):
        conv.sample("h_0.5", coarse_grid)
    conv.clear_cache()


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.1, max_value=2.0), st.floats(min_value=0.1, max_value=2.0))
def test_power_kernel_semigroup(a, b):
    grid = Grid(2.0, 1.0 / 128)
    out = conv.num_conv(h(a), h(b), grid)
    assert out.p == pytest.approx(a + b - 1.0)
    mask = grid.window(0.25)
    expected = h(a + b)(grid.points)
    rel = np.abs(out.values() - expected) / np.abs(expected)
    assert rel[mask].max() <= 1e-3


_SEMIGROUP_EXPONENTS = [(0.1, 0.1), (0.25, 1.9), (0.3, 0.4), (0.5, 0.5), (0.6, 1.3), (0.75, 0.2),
                       (1.0, 1.0), (1.2, 0.7), (1.5, 1.5), (2.0, 2.0)]


@pytest.mark.parametrize(("a", "b"), _SEMIGROUP_EXPONENTS)
def test_power_kernel_semigroup_converges(default_grid, a, b):
    def relative(grid):
        expected = h(a + b)(grid.points)
        return (conv.num_conv(h(a), h(b), grid).values() - expected) / expected

    report = conv.convergence_report(relative, default_grid, 10 * default_grid.step,
                                     Tolerance(1e-3))
    assert report.passed
    assert report.note == "exact to roundoff" or report.estimated_order >= 0.8


def test_num_conv_commutes(default_grid):
    f = kernels.sonine_pair_kummer(0.4, 0.7, 2.0)[0]
    g = SampledFunction(default_grid, 0.0, np.exp(default_grid.nodes))
    np.testing.assert_allclose(conv.num_conv(f, g, default_grid).values(),
                               conv.num_conv(g, f, default_grid).values(), rtol=1e-12)


def test_num_conv_associates(coarse_grid):
    a, b, c = h(0.3), h(0.5), h(0.9)
    left = conv.num_conv(conv.num_conv(a, b, coarse_grid), c, coarse_grid)
    right = conv.num_conv(a, conv.num_conv(b, c, coarse_grid), coarse_grid)
    mask = coarse_grid.window(0.25)
    np.testing.assert_allclose(left.values()[mask], right.values()[mask], rtol=2e-3)


def test_nested_power_convolution_is_exact(coarse_grid):
    inner = conv.num_conv(h(0.3), h(0.4), coarse_grid)
    np.testing.assert_allclose(inner.smooth_values, 1.0 / math.gamma(0.7), rtol=1e-13)
    out = conv.num_conv(inner, h(0.3), coarse_grid)
    assert out.p == pytest.approx(0.0)
    np.testing.assert_allclose(out.values(), 1.0, rtol=1e-12)


def test_nested_convolution_keeps_its_order(coarse_grid):
    # h_0.3 * mu * h_0.7 = h_1 * mu, the integral of mu
    mu = kernels.tempered_power_kernel(0.4, 1.0)

    def residual(grid):
        out = conv.num_conv(conv.num_conv(h(0.3), mu, grid), h(0.7), grid)
        return out.values() - special.gammainc(0.4, grid.points)

    report = conv.convergence_report(residual, coarse_grid, 10 * coarse_grid.step)
    assert report.sup_residual < 1e-3
    assert report.estimated_order >= 0.8
    assert report.passed


def test_num_conv_with_zero_is_zero(coarse_grid):
    out = conv.num_conv(kernels.sonine_pair_tempered(0.3, 1.0)[1], conv.zeros(coarse_grid),
                        coarse_grid)
    assert np.all(out.smooth_values == 0.0)


def test_num_conv_label(coarse_grid):
    out = conv.num_conv(h(0.5), h(0.5), coarse_grid)
    assert out.label == "(h_{0.5} * h_{0.5})"


def test_iterated_integral_of_constant(default_grid):
    one = SampledFunction(default_grid, 0.0, np.ones(default_grid.J + 1))
    t = default_grid.points
    np.testing.assert_allclose(conv.iterated_integral(one, 1).values(), t, rtol=1e-9)
    third = conv.iterated_integral(one, 3).values()
    np.testing.assert_allclose(third, t ** 3 / 6.0, rtol=1e-9)
    assert third[1] == pytest.approx(t[1] ** 3 / 6.0, rel=1e-12)
    with pytest.raises(DomainError):
        conv.iterated_integral(one, 0)


def test_iterated_integral_of_identity(default_grid):
    X = SampledFunction(default_grid, 0.0, default_grid.nodes.copy())
    assert conv.iterated_integral(X, 3).at(1.0) == pytest.approx(1.0 / 24.0, rel=1e-9)


def test_differentiate_smooth(default_grid):
    t = default_grid.points
    inside = (t >= 0.1) & (t <= 4.5)
    f = SampledFunction(default_grid, 0.0, np.sin(default_grid.nodes))
    np.testing.assert_allclose(conv.differentiate(f, 1).values()[inside], np.cos(t[inside]),
                               atol=1e-5)
    np.testing.assert_allclose(conv.differentiate(f, 2).values()[inside], -np.sin(t[inside]),
                               atol=1e-4)
    assert conv.differentiate(f, 0) is f


@pytest.mark.parametrize(("order", "atol"), [(1, 1e-4), (2, 1e-3), (3, 2e-3), (4, 5e-3)])
def test_differentiate_whole_grid(coarse_grid, order, atol):
    t = coarse_grid.points
    f = SampledFunction(coarse_grid, 0.0, np.sin(coarse_grid.nodes))
    expected = np.sin(t + 0.5 * order * math.pi)
    np.testing.assert_allclose(conv.differentiate(f, order).values(), expected, atol=atol)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_differentiate_is_second_order_at_the_horizon(coarse_grid, order):
    errors = []
    for grid in (coarse_grid, coarse_grid.refined()):
        f = SampledFunction(grid, 0.0, np.exp(grid.nodes))
        errors.append(abs(conv.differentiate(f, order).values()[-1] - math.exp(grid.T)))
    assert errors[0] / errors[1] > 3.0


def test_differentiate_singular_factor(default_grid):
    t = default_grid.points
    inside = (t >= 0.1) & (t <= 4.5)
    f = SampledFunction(default_grid, 0.5, np.cos(default_grid.nodes))
    d = conv.differentiate(f, 1)
    assert d.p == -0.5
    expected = 0.5 * t ** -0.5 * np.cos(t) - t ** 0.5 * np.sin(t)
    np.testing.assert_allclose(d.values()[inside], expected[inside], atol=1e-5)


def test_differentiate_folds_integer_exponent(default_grid):
    d = conv.differentiate(conv.sample(kernels.moment_kernel(2), default_grid), 2)
    assert d.p == 0.0
    np.testing.assert_allclose(d.values(), 0.0, atol=1e-8)


def test_differentiate_domain(coarse_grid):
    f = conv.sample(h(0.5), coarse_grid)
    with pytest.raises(DomainError):
        conv.differentiate(f, 1)
    with pytest.raises(DomainError):
        conv.differentiate(f, -1)


def test_convergence_report_exact(coarse_grid):
    report = conv.convergence_report(lambda g: np.zeros(g.J), coarse_grid, 0.1, key="zero")
    assert report.passed
    assert report.note == "exact to roundoff"
    assert report.key == "zero"
    assert math.isnan(report.estimated_order)
    assert report.residual_at_1 == 0.0


def test_convergence_report_keeps_the_order_below_the_floor(coarse_grid):
    report = conv.convergence_report(lambda g: np.full(g.J, 1e-6 * g.step ** 2), coarse_grid, 0.1)
    assert report.passed
    assert report.note == "exact to roundoff"
    assert report.estimated_order == pytest.approx(2.0)


def test_convergence_report_second_order(coarse_grid):
    report = conv.convergence_report(lambda g: g.step ** 2 * g.points, coarse_grid, 0.1)
    assert report.passed
    assert report.estimated_order == pytest.approx(2.0)
    assert report.sup_residual == pytest.approx(2.0 * coarse_grid.step ** 2)
    assert report.argmax_t == pytest.approx(2.0)
    assert report.residual_at_1 == pytest.approx(coarse_grid.step ** 2)
    assert report.extrapolated_error == pytest.approx(5.0 * report.sup_residual)


def test_convergence_report_fails(coarse_grid):
    stalled = conv.convergence_report(lambda g: np.full(g.J, 1e-3), coarse_grid, 0.1)
    assert stalled.verdict is Verdict.Fail
    assert stalled.estimated_order == pytest.approx(0.0)
    large = conv.convergence_report(lambda g: 1e3 * g.step ** 2 * np.ones(g.J), coarse_grid, 0.1,
                                    Tolerance(1e-3))
    assert not large.passed
    assert large.tolerance == 1e-3


def test_sup_residual_window(coarse_grid):
    t = coarse_grid.points
    residual = np.where(t < 0.5, 100.0, -t)
    sup, at = conv.sup_residual(residual, coarse_grid, 0.5)
    assert sup == pytest.approx(2.0)
    assert at == pytest.approx(2.0)
    with pytest.raises(DomainError):
        conv.sup_residual(residual[1:], coarse_grid, 0.5)
    residual[-1] = np.inf
    with pytest.raises(EvaluationError):
        conv.sup_residual(residual, coarse_grid, 0.5)


def test_failed_report_row():
    report = conv.failed_report("DomainError: no", key="k", step=0.5)
    assert not report.passed
    assert math.isnan(report.extrapolated_error)
    row = report.as_row()
    assert row["verdict"] == "fail"
    assert row["note"] == "DomainError: no"
    assert row["key"] == "k"


def test_tolerance_validation():
    with pytest.raises(DomainError):
        Tolerance(abs_tol=0.0)
