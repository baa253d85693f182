import math

import numpy as np
import pytest
from scipy import integrate

from varheat.errors import InvalidArgumentError, NumericalFailureError
from varheat.gaussian import (
    b0_alpha, c0_alpha, power_order, sample_fbm, sample_u0_path, u0_time_covariance,
)
from varheat.kernel import KernelParams
from varheat.spde_sim import (
    SigmaSpec, SimConfig, SpectralSolver, coupled_increment, holder_diagnostics, simulate, simulate_parametrized,
    solve_nonlinear, solve_parametrized, subgrid_autocovariance,
)
from varheat.variations import power_variation, quad_variation_renorm

SMALL = dict(alpha=2.0, grid_n=16, n_space=256, seed=3)


# --- SigmaSpec ---

def test_sigma_parse_and_evaluate():
    sigma = SigmaSpec.parse("sinusoidal:1,0.5,1")
    assert sigma == SigmaSpec.sinusoidal(1.0, 0.5, 1.0)
    assert sigma(np.array([0.0]))[0] == pytest.approx(1.0)
    assert sigma(np.array([math.pi / 2]))[0] == pytest.approx(1.5)
    assert sigma.lipschitz_constant == pytest.approx(0.5)
    assert SigmaSpec.from_dict(sigma.to_dict()) == sigma


def test_sigma_scaled():
    assert SigmaSpec.affine(1.0, 0.5).scaled(2.0) == SigmaSpec.affine(2.0, 1.0)
    assert SigmaSpec.sinusoidal(1.0, 0.5, 3.0).scaled(0.5) == SigmaSpec.sinusoidal(0.5, 0.25, 3.0)


@pytest.mark.parametrize("text", ["cubic:1", "affine:1", "constant:x", "constant:inf"])
def test_sigma_rejects_bad_specs(text):
    with pytest.raises(InvalidArgumentError):
        SigmaSpec.parse(text)


# --- SimConfig ---

def test_config_defaults_resolved():
    config = SimConfig(alpha=2.0).validate()
    assert config.half_length == pytest.approx(5.0)
    assert config.observe_x == pytest.approx(5.0)
    assert config.dx == pytest.approx(10.0 / 1024)


@pytest.mark.parametrize("changes", [
    {"n_space": 128}, {"n_space": 300}, {"alpha": 2.5}, {"theta": 0.0}, {"half_length": 1.0},
    {"n_time": 10}, {"scheme": "euler"}, {"observe_x": 20.0}, {"t_horizon": 0.5},
])
def test_config_rejects(changes):
    with pytest.raises(InvalidArgumentError):
        SimConfig(**{"alpha": 2.0, **changes}).validate()


# --- solver ---

def test_simulate_is_reproducible():
    config = SimConfig(sigma=SigmaSpec.sinusoidal(1.0, 0.5, 1.0), **SMALL)
    a = simulate(config, replicate=2)
    b = simulate(config, replicate=2)
    np.testing.assert_array_equal(a.path.values, b.path.values)
    assert a.path.meta == "spde-numeric"
    assert a.path.values[0] == 0.0
    assert a.fine_times[-1] == pytest.approx(1.0)
    assert a.fine_values.size == a.fine_times.size
    np.testing.assert_array_equal(solve_nonlinear(config, replicate=2).values, a.path.values)


def test_parametrized_matches_direct_at_unit_theta():
    config = SimConfig(sigma=SigmaSpec.affine(1.0, 0.3), **SMALL)
    np.testing.assert_array_equal(solve_parametrized(config, 1).values, solve_nonlinear(config, 1).values)


def test_parametrized_observes_original_clock():
    config = SimConfig(theta=2.0, t_horizon=2.0, **SMALL)
    output = simulate_parametrized(config)
    assert output.fine_times[-1] == pytest.approx(1.0)
    assert output.diagnostics["clock_scale"] == 2.0


def test_snapshots():
    config = SimConfig(snapshot_every=4, **SMALL)
    output = simulate(config)
    assert len(output.snapshots) == 4
    assert output.snapshots[-1][0] == pytest.approx(1.0)
    assert output.snapshots[0][1].shape == (256,)


def _covariance_ratios(replicates, grid_n, n_space):
    """(diagonal, off-diagonal) ratio of summed empirical to exact covariances over t in [1/2, 1]."""
    params = KernelParams(2.0)
    config = SimConfig(alpha=2.0, grid_n=grid_n, n_space=n_space, seed=21)
    observed = np.stack([simulate(config, r).path.values for r in range(replicates)])[:, grid_n // 2:]
    times = np.arange(grid_n // 2, grid_n + 1) / grid_n
    empirical = observed.T @ observed / replicates
    theory = np.array([[u0_time_covariance(params, s, t) for t in times] for s in times])
    upper = np.triu_indices(times.size, k=1)
    return np.trace(empirical) / np.trace(theory), empirical[upper].sum() / theory[upper].sum()


def test_constant_sigma_matches_exact_law():
    diagonal, off_diagonal = _covariance_ratios(800, 8, 256)
    assert diagonal == pytest.approx(1.0, abs=0.15)
    assert off_diagonal == pytest.approx(1.0, abs=0.15)


@pytest.mark.slow
def test_constant_sigma_matches_exact_law_tight():
    diagonal, off_diagonal = _covariance_ratios(4000, 16, 512)
    assert diagonal == pytest.approx(1.0, abs=0.05)
    assert off_diagonal == pytest.approx(1.0, abs=0.05)


def _mean_variations(config, replicates, solve):
    params = KernelParams(config.alpha)
    p = power_order(config.alpha)
    paths = [solve(config, r) for r in range(replicates)]
    v = np.mean([quad_variation_renorm(path, config.alpha).statistic for path in paths])
    u = np.mean([power_variation(path, p).statistic for path in paths])
    return v, u, c0_alpha(params) ** 2, b0_alpha(params)


def test_variations_reach_gaussian_limits():
    config = SimConfig(alpha=2.0, grid_n=256, n_space=512, seed=31)
    v, u, c0_sq, b0 = _mean_variations(config, 40, solve_nonlinear)
    assert v == pytest.approx(c0_sq, rel=0.1)
    assert u == pytest.approx(b0, rel=0.1)


def test_parametrized_variations_follow_theta():
    theta = 2.0
    config = SimConfig(alpha=2.0, theta=theta, t_horizon=theta, grid_n=256, n_space=512, seed=32)
    v, u, c0_sq, b0 = _mean_variations(config, 40, solve_parametrized)
    assert v == pytest.approx(c0_sq * theta ** -0.5, rel=0.1)
    assert u == pytest.approx(b0 / theta, rel=0.1)


def test_subgrid_autocovariance_against_quadrature():
    alpha, theta, nyquist, spacing = 1.5, 1.0, 50.0, 0.01
    values = subgrid_autocovariance(alpha, theta, nyquist, spacing, 4)
    for k in range(4):
        oracle, _ = integrate.quad(
            lambda xi: math.exp(-theta * k * spacing * xi ** alpha) / (2.0 * theta * xi ** alpha),
            nyquist, np.inf, epsabs=1e-14, epsrel=1e-12,
        )
        assert values[k] == pytest.approx(oracle / math.pi, rel=1e-6)


# --- coupled increments ---

def test_coupled_increment_exact_without_copy():
    config = SimConfig(alpha=2.0, n_space=256, seed=5)
    sample = coupled_increment(config, t=0.5, delta=2 ** -6, independent_copy=False)
    assert sample.squared_gap == 0.0
    assert sample.t == pytest.approx(0.5)
    assert sample.t_delta == pytest.approx(0.5 - (2 ** -6) ** 0.8, abs=1e-3)


def test_coupled_increment_reproducible():
    config = SimConfig(alpha=2.0, sigma=SigmaSpec.affine(1.0, 0.5), n_space=256, seed=5)
    a = coupled_increment(config, 0.5, 2 ** -6, replicate=3)
    b = coupled_increment(config, 0.5, 2 ** -6, replicate=3)
    assert a.real_increment == b.real_increment
    assert a.surrogate == b.surrogate
    assert a.squared_gap > 0


@pytest.mark.parametrize("t,delta", [(0.01, 2 ** -6), (1.0, 2 ** -6), (0.5, 0.0)])
def test_coupled_increment_rejects(t, delta):
    with pytest.raises(InvalidArgumentError):
        coupled_increment(SimConfig(alpha=2.0, n_space=256), t, delta)


# --- Holder diagnostics ---

def test_holder_exponent_of_fbm():
    paths = [sample_fbm(0.25, 1024, seed=8, replicate=r) for r in range(20)]
    report = holder_diagnostics(paths, alpha=2.0)
    assert report.exponent == pytest.approx(0.25, abs=0.03)
    assert report.theory == pytest.approx(0.25)
    assert len(report.lags) == 7


def test_holder_needs_long_paths():
    with pytest.raises(InvalidArgumentError):
        holder_diagnostics(sample_fbm(0.25, 128, seed=1), alpha=2.0)


@pytest.mark.parametrize("alpha", [2.0, 1.5])
def test_holder_exponent_of_linear_solution(alpha):
    params = KernelParams(alpha)
    paths = [sample_u0_path(params, 1024, seed=9, replicate=r) for r in range(20)]
    report = holder_diagnostics(paths, alpha)
    assert report.theory == pytest.approx(0.5 - 1.0 / (2.0 * alpha))
    assert report.exponent == pytest.approx(report.theory, abs=0.05)


def test_holder_rejects_vanishing_noise():
    config = SimConfig(alpha=2.0, sigma=SigmaSpec.constant(0.0), grid_n=256, n_space=256, seed=4)
    path = solve_nonlinear(config, 0)
    assert not np.any(path.values)
    with pytest.raises(NumericalFailureError, match="increments vanish"):
        holder_diagnostics(path, alpha=2.0)


def test_noise_cell_variance():
    solver = SpectralSolver(2.0, 1.0, 256, 5.0, 5.0, dt=1e-4)
    cells = solver.noise_cells(np.random.default_rng(17), 400)
    assert cells.shape == (400, 256)
    target = solver.dt * solver.dx
    standard_error = target * math.sqrt(2.0 / cells.size)
    assert abs(cells.var() - target) < 3.0 * standard_error
    assert abs(cells.mean()) < 3.0 * math.sqrt(target / cells.size)


def _moment_envelope(n_time, replicates):
    config = SimConfig(alpha=2.0, sigma=SigmaSpec.affine(1.0, 0.5), grid_n=8, n_space=256, n_time=n_time, seed=12)
    observed = np.stack([solve_nonlinear(config, r).values for r in range(replicates)])
    return float(np.max(np.mean(observed ** 2, axis=0)))


def test_moment_envelope_stable_under_step_halving():
    assert _moment_envelope(2048, 300) == pytest.approx(_moment_envelope(1024, 300), rel=0.3)


@pytest.mark.slow
def test_moment_envelope_stable_under_step_halving_tight():
    assert _moment_envelope(2048, 3000) == pytest.approx(_moment_envelope(1024, 3000), rel=0.12)
