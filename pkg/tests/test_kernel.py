import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from varheat.errors import InvalidArgumentError
from varheat.kernel import (
    KernelParams, green_kernel_two_sided, green_kernel_value, increment_kernel_integral, kernel_l2_time_integral,
    kernel_property_check, l2_constant, l2_constant_closed_form,
)

ALPHAS = [1.25, 1.5, 1.75, 2.0]


@pytest.mark.parametrize("t", [0.1, 0.5, 2.0])
@pytest.mark.parametrize("x", [0.0, 0.3, 1.5])
def test_gaussian_case_matches_heat_kernel(t, x):
    expected = math.exp(-x * x / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
    assert green_kernel_value(KernelParams(2.0), t, x) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(alpha=st.sampled_from(ALPHAS), t=st.floats(0.05, 3.0), x=st.floats(0.0, 4.0))
def test_symmetry(alpha, t, x):
    params = KernelParams(alpha)
    mirrored = green_kernel_two_sided(params, t, -x)
    assert mirrored.real == pytest.approx(green_kernel_value(params, t, x), abs=1e-9)
    assert abs(mirrored.imag) < 1e-9


@pytest.mark.parametrize("x", [-1.5, -0.3, 0.7])
def test_two_sided_gaussian_case(x):
    value = green_kernel_two_sided(KernelParams(2.0), 0.5, x)
    assert value.real == pytest.approx(math.exp(-x * x / 2.0) / math.sqrt(2.0 * math.pi), abs=1e-9)
    assert abs(value.imag) < 1e-9


@settings(max_examples=15, deadline=None)
@given(alpha=st.sampled_from(ALPHAS), t=st.floats(0.1, 3.0), z=st.floats(-3.0, 3.0))
def test_self_similar_scaling(alpha, t, z):
    params = KernelParams(alpha)
    scale = t ** (1.0 / alpha)
    direct = green_kernel_value(params, t, z * scale)
    rescaled = green_kernel_value(params, 1.0, z) / scale
    assert direct == pytest.approx(rescaled, abs=1e-8)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_l2_constant_closed_form(alpha):
    assert l2_constant(KernelParams(alpha)) == pytest.approx(l2_constant_closed_form(alpha), rel=1e-8)


def test_l2_time_integral_gaussian_case():
    # int_0^1 (8 pi a)^{-1/2} da
    assert kernel_l2_time_integral(KernelParams(2.0), 0.0, 1.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-10)


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [1.5, 1.75])
def test_l2_time_integral_against_nested_quadrature(alpha):
    s, t = 0.2, 1.0

    def spatial_l2(a):
        value, _ = integrate.quad(lambda xi: math.exp(-2.0 * (t - a) * xi ** alpha), 0.0, np.inf, limit=200)
        return value / math.pi

    oracle, _ = integrate.quad(spatial_l2, s, t, limit=200)
    assert kernel_l2_time_integral(KernelParams(alpha), s, t) == pytest.approx(oracle, rel=1e-4)


@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_increment_integral_scales_like_delta_squared(alpha):
    params = KernelParams(alpha)
    small = increment_kernel_integral(params, 0.5, 1.0, 1e-3)
    smaller = increment_kernel_integral(params, 0.5, 1.0, 5e-4)
    assert small.value > 0
    assert smaller.bound_constant == pytest.approx(small.bound_constant, rel=0.05)
    assert small.inputs == (0.5, 1.0, 1e-3)


@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_property_check(alpha):
    report = kernel_property_check(KernelParams(alpha), 0.5)
    assert report.normalization_error < 1e-6
    assert report.symmetry_error < 1e-9
    assert report.scaling_error < 1e-8
    assert 0 < report.sandwich_lower <= report.sandwich_upper


@pytest.mark.slow
@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("t", [0.1, 1.0, 5.0])
def test_property_check_full_grid(alpha, t):
    report = kernel_property_check(KernelParams(alpha), t)
    assert report.normalization_error < 1e-6
    assert report.symmetry_error < 1e-9
    assert report.scaling_error < 1e-8


@pytest.mark.parametrize("alpha", [1.0, 2.5, float("nan")])
def test_alpha_outside_range(alpha):
    with pytest.raises(InvalidArgumentError):
        KernelParams(alpha)


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_non_positive_time(t):
    with pytest.raises(InvalidArgumentError):
        green_kernel_value(KernelParams(1.5), t, 0.0)


def test_tail_cutoff_too_small():
    with pytest.raises(InvalidArgumentError):
        green_kernel_value(KernelParams(2.0, tail_cutoff=1.0), 1.0, 0.0)
