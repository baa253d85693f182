import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from varheat.errors import DegenerateInputError, EstimatorUndefinedError, InvalidArgumentError
from varheat.estimators import (
    alpha_bias_diagnostic, c0_squared_closed_form, estimate_alpha, estimate_alpha_corrected,
    estimate_theta_power, estimate_theta_quadratic, expected_alpha_hat, theoretical_limits,
)
from varheat.gaussian import Path, b0_alpha, c0_alpha, sample_fbm, sample_linear_theta_path, sample_u0_path
from varheat.kernel import KernelParams
from varheat.spde_sim import SigmaSpec, SimConfig, simulate_parametrized
from varheat.variations import power_variation, quad_variation_renorm, riemann_sigma_sum

UNIT = SigmaSpec.constant(1.0)


def _equal_step_path(grid_n, square_sum):
    step = math.sqrt(square_sum / grid_n)
    return Path(values=step * np.arange(grid_n + 1), grid_n=grid_n, meta="u0-exact")


# --- exact inversion ---

@settings(max_examples=40)
@given(alpha=st.floats(1.05, 2.0), log2_n=st.integers(4, 12))
def test_alpha_inverts_exact_statistic(alpha, log2_n):
    n = 2 ** log2_n
    result = estimate_alpha(_equal_step_path(n, n ** (1.0 / alpha)), UNIT)
    assert result.estimate == pytest.approx(alpha, abs=1e-12)
    assert result.a_n == pytest.approx(n ** (1.0 / alpha), rel=1e-12)


@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
def test_corrected_alpha_inverts_exact_statistic(alpha, theta):
    n = 1024
    a_n = n ** (1.0 / alpha) * c0_squared_closed_form(alpha) * theta ** (-1.0 / alpha)
    result = estimate_alpha_corrected(_equal_step_path(n, a_n), UNIT, theta)
    assert result.estimate == pytest.approx(alpha, abs=1e-9)
    assert "clamped" not in result.diagnostics


def test_corrected_alpha_clamps_to_bracket():
    n = 1024
    rough = estimate_alpha_corrected(_equal_step_path(n, 0.1 * math.sqrt(n)), UNIT)
    assert rough.estimate == 2.0
    assert rough.diagnostics["clamped"] == "upper"


@pytest.mark.parametrize("theta", [0.5, 2.0, 7.0])
def test_theta_quadratic_inverts_exactly(theta):
    alpha, path, sigma = 2.0, sample_fbm(0.25, 256, seed=4), SigmaSpec.affine(1.0, 0.5)
    v = quad_variation_renorm(path, alpha).statistic
    riemann = riemann_sigma_sum(path, sigma, 2)
    c0 = math.sqrt(v / (riemann * theta ** (-1.0 / alpha)))
    result = estimate_theta_quadratic(path, alpha, sigma, c0)
    assert result.estimate == pytest.approx(theta, rel=1e-12)
    assert result.to_json_dict()["constants"] == {"c0": c0}


@pytest.mark.parametrize("theta", [0.5, 2.0, 7.0])
def test_theta_power_inverts_exactly(theta):
    alpha, path, sigma = 1.5, sample_fbm(1.0 / 6.0, 256, seed=4), SigmaSpec.sinusoidal(1.0, 0.5, 1.0)
    u = power_variation(path, 6).statistic
    riemann = riemann_sigma_sum(path, sigma, 6)
    b0 = u / (riemann * theta ** (-1.0 / (alpha - 1.0)))
    assert estimate_theta_power(path, alpha, sigma, b0).estimate == pytest.approx(theta, rel=1e-12)


def test_estimate_json_fields():
    result = estimate_alpha(_equal_step_path(64, 8.0), UNIT)
    data = result.to_json_dict()
    assert list(data) == ["target", "method", "estimate", "n", "a_n", "riemann_sum", "constants"]
    assert data["target"] == "alpha"
    assert data["n"] == 64
    assert data["constants"] == {}


# --- failure modes ---

def test_alpha_undefined_when_ratio_not_above_one():
    with pytest.raises(EstimatorUndefinedError):
        estimate_alpha(_equal_step_path(64, 0.5), UNIT)


def test_constant_path_is_degenerate():
    path = Path(values=np.ones(65), grid_n=64)
    with pytest.raises(DegenerateInputError):
        estimate_alpha(path, UNIT)
    with pytest.raises(DegenerateInputError):
        estimate_theta_quadratic(path, 2.0, UNIT, 1.0)


def test_vanishing_sigma_is_degenerate():
    with pytest.raises(DegenerateInputError):
        estimate_alpha(sample_fbm(0.25, 64, seed=1), SigmaSpec.constant(0.0))


def test_short_path_rejected():
    with pytest.raises(InvalidArgumentError):
        estimate_alpha(Path(values=np.arange(4.0), grid_n=3), UNIT)


def test_power_estimator_needs_even_order():
    with pytest.raises(InvalidArgumentError):
        estimate_theta_power(sample_fbm(0.25, 64, seed=1), 1.75, UNIT, 1.0)


# --- limits and bias ---

def test_theoretical_limits_gaussian_case():
    v_limit, u_limit = theoretical_limits(2.0, 1.0, 1.0, 1.0)
    assert v_limit == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-6)
    assert u_limit == pytest.approx(3.0 / math.pi, rel=1e-6)


def test_theoretical_limits_without_even_order():
    _, u_limit = theoretical_limits(1.75, 1.0, 1.0, 1.0)
    assert u_limit is None


def test_expected_alpha_hat_and_bias():
    n = 2 ** 14
    expected = expected_alpha_hat(2.0, 1.0, n)
    assert 1.0 / expected == pytest.approx(0.5 + alpha_bias_diagnostic(2.0, 1.0, n), rel=1e-12)
    assert expected > 2.0


@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75, 2.0])
def test_closed_form_c0_matches_quadrature(alpha):
    assert c0_squared_closed_form(alpha) == pytest.approx(c0_alpha(KernelParams(alpha)) ** 2, rel=1e-6)


def test_alpha_bias_diagnostic_attached_with_theta():
    n = 1024
    path = _equal_step_path(n, 2.0 * n ** 0.5)
    assert estimate_alpha(path, UNIT).diagnostics == {}
    result = estimate_alpha(path, UNIT, theta=2.0)
    assert result.diagnostics["theta"] == 2.0
    assert result.diagnostics["bias_diagnostic"] == pytest.approx(alpha_bias_diagnostic(result.estimate, 2.0, n), rel=1e-12)
    assert result.to_json_dict()["diagnostics"] == result.diagnostics


def test_alpha_bias_diagnostic_needs_plug_in_above_one():
    result = estimate_alpha(_equal_step_path(64, 128.0), UNIT, theta=1.0)
    assert result.estimate < 1.0
    assert result.diagnostics == {"theta": 1.0, "bias_diagnostic": None}


def test_alpha_rejects_non_positive_theta():
    with pytest.raises(InvalidArgumentError):
        estimate_alpha(_equal_step_path(64, 8.0), UNIT, theta=0.0)


@settings(max_examples=30, deadline=None)
@given(scale=st.floats(0.5, 4.0))
def test_alpha_scale_equivariance(scale):
    path = sample_fbm(0.25, 256, seed=3)
    base = estimate_alpha(path, UNIT)
    scaled = estimate_alpha(path.scaled(scale), UNIT)
    assert scaled.estimate == pytest.approx(math.log(256) / (math.log(base.a_n) + 2.0 * math.log(scale)), rel=1e-10)


# --- consistency on the linear solution ---

def test_corrected_alpha_on_u0():
    params = KernelParams(1.5)
    errors = [abs(estimate_alpha_corrected(sample_u0_path(params, 1024, seed=2, replicate=r), UNIT).estimate - 1.5)
              for r in range(20)]
    assert np.median(errors) < 0.1


def test_theta_estimators_on_u0():
    params = KernelParams(2.0)
    c0, b0 = c0_alpha(params), b0_alpha(params)
    quad, power = [], []
    for r in range(30):
        path = sample_linear_theta_path(params, 1024, 2.0, seed=6, replicate=r)
        quad.append(abs(estimate_theta_quadratic(path, 2.0, UNIT, c0).estimate / 2.0 - 1.0))
        power.append(abs(estimate_theta_power(path, 2.0, UNIT, b0).estimate / 2.0 - 1.0))
    assert np.median(quad) < 0.15
    assert np.median(power) < 0.2


@pytest.mark.slow
def test_estimators_at_acceptance_size():
    params = KernelParams(2.0)
    c0, b0 = c0_alpha(params), b0_alpha(params)
    quad, power = [], []
    for r in range(100):
        path = sample_linear_theta_path(params, 4096, 2.0, seed=6, replicate=r)
        quad.append(abs(estimate_theta_quadratic(path, 2.0, UNIT, c0).estimate / 2.0 - 1.0))
        power.append(abs(estimate_theta_power(path, 2.0, UNIT, b0).estimate / 2.0 - 1.0))
    assert np.median(quad) <= 0.10
    assert np.median(power) <= 0.15
    alpha_errors = [abs(estimate_alpha_corrected(sample_u0_path(params, 16384, seed=2, replicate=r), UNIT).estimate - 2.0)
                    for r in range(100)]
    assert np.median(alpha_errors) <= 0.1


def _raw_alpha_hats(grid, replicates, seed):
    """Raw alpha_hat at every N in grid, all read off the same u0 realizations at the finest N."""
    finest = max(grid)
    hats = {n: [] for n in grid}
    for r in range(replicates):
        path = sample_u0_path(KernelParams(2.0), finest, seed=seed, replicate=r)
        for n in grid:
            hats[n].append(estimate_alpha(path.subsample(finest // n), UNIT).estimate)
    return {n: np.asarray(values) for n, values in hats.items()}


def _check_raw_alpha_convergence(grid, replicates, seed):
    hats = _raw_alpha_hats(grid, replicates, seed)
    errors = [np.median(np.abs(hats[n] - 2.0)) for n in grid]
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    finest = max(grid)
    assert np.median(hats[finest]) == pytest.approx(expected_alpha_hat(2.0, 1.0, finest), abs=0.05)


def test_raw_alpha_error_decreases_with_n():
    assert expected_alpha_hat(2.0, 1.0, 4096) == pytest.approx(2.319, abs=1e-3)
    _check_raw_alpha_convergence([256, 1024, 4096], 20, seed=41)


@pytest.mark.slow
def test_raw_alpha_error_decreases_with_n_full_size():
    assert expected_alpha_hat(2.0, 1.0, 2 ** 14) == pytest.approx(2.267, abs=1e-3)
    _check_raw_alpha_convergence([2 ** 10, 2 ** 12, 2 ** 14], 100, seed=41)


def _theta_errors_on_solver(grid_n, replicates):
    theta, alpha = 2.0, 2.0
    params = KernelParams(alpha)
    c0, b0 = c0_alpha(params), b0_alpha(params)
    sigma = SigmaSpec.sinusoidal(1.0, 0.5, 1.0)
    config = SimConfig(alpha=alpha, theta=theta, sigma=sigma, grid_n=grid_n, n_space=512, t_horizon=theta, seed=43)
    quad, power = [], []
    for r in range(replicates):
        path = simulate_parametrized(config, r).path
        quad.append(abs(estimate_theta_quadratic(path, alpha, sigma, c0).estimate / theta - 1.0))
        power.append(abs(estimate_theta_power(path, alpha, sigma, b0).estimate / theta - 1.0))
    return np.median(quad), np.median(power)


def test_theta_estimators_on_solver_paths():
    quad, power = _theta_errors_on_solver(256, 30)
    assert quad < 0.25
    assert power < 0.3


@pytest.mark.slow
def test_theta_estimators_on_solver_paths_full_size():
    quad, power = _theta_errors_on_solver(1024, 60)
    assert quad < 0.15
    assert power < 0.2
