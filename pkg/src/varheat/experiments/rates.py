"""
Convergence-rate experiments: error of a variation statistic against its
(pathwise) limit as a function of N, regressed on a log-log scale.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..errors import InvalidArgumentError
from ..gaussian import (
    PerturbedFbmSpec, b0_alpha, c0_alpha, even_power_order, perturbed_rate_exponent,
    sample_fbm, sample_linear_theta_path, sample_perturbed_fbm, sample_u0_path,
)
from ..kernel import KernelParams
from ..spde_sim import SigmaSpec, SimConfig, simulate, simulate_parametrized
from ..variations import (
    fbm_normalized_variation, pathwise_sigma_integral, power_variation, quad_variation_renorm,
)
from .report import McReport, RateSpec, build_report, compare_slopes
from .runner import ReplicateRunner

logger = logging.getLogger(__name__)

RATE_TARGETS = ("fbm_vn", "perturbed_vn", "u0_vn", "nonlinear_vn", "nonlinear_un")
MIN_GRID_POINTS = 4
MIN_REPLICATES = 100


@dataclass(frozen=True)
class ExperimentParams:
    """
    Process and model parameters shared by all experiments.

    Attributes:
        alpha: Order of the fractional Laplacian.
        theta: Drift parameter.
        sigma: Diffusion coefficient for nonlinear targets.
        hurst: Hurst index for fbm/perturbed targets.
        c0: Amplitude C_0 of perturbed fBm.
        perturbation_scale: c_Y of perturbed fBm.
        n_space: Solver grid points.
        process: 'u0' (exact Gaussian) or 'spde' (solver) for estimator experiments.
        error_norm: 'l1' or 'l2'; None picks l2 for Gaussian targets and l1 for nonlinear ones.
    """
    alpha: float = 2.0
    theta: float = 1.0
    sigma: SigmaSpec = field(default_factory=lambda: SigmaSpec.sinusoidal(1.0, 0.5, 1.0))
    hurst: float = 0.25
    c0: float = 1.0
    perturbation_scale: float = 1.0
    n_space: int = 1024
    process: str = "u0"
    error_norm: Optional[str] = None

    def kernel(self) -> KernelParams:
        return KernelParams(self.alpha)

    def sim_config(self, grid_n: int, seed: int, sigma: Optional[SigmaSpec] = None) -> SimConfig:
        return SimConfig(alpha=self.alpha, theta=self.theta, sigma=sigma or self.sigma, grid_n=grid_n,
                         n_space=self.n_space, seed=seed, t_horizon=max(1.0, self.theta))


def nonlinear_rate_exponent(alpha: float) -> float:
    """(alpha - 1)(1 - 2 alpha) / (2 alpha (2 alpha + 1)); -3/20 at alpha = 2."""
    return (alpha - 1.0) * (1.0 - 2.0 * alpha) / (2.0 * alpha * (2.0 * alpha + 1.0))


def check_grid(n_grid: Sequence[int], minimum: int) -> List[int]:
    grid = sorted(int(n) for n in n_grid)
    if len(set(grid)) != len(grid) or len(grid) < minimum:
        raise InvalidArgumentError(f"need at least {minimum} distinct grid sizes, got {list(n_grid)}")
    for n in grid:
        if n < 2 or n & (n - 1):
            raise InvalidArgumentError(f"grid sizes must be dyadic, got {n}")
    return grid


def check_replicates(replicates: int, strict: bool) -> None:
    if replicates < 1 or (strict and replicates < MIN_REPLICATES):
        raise InvalidArgumentError(f"need at least {MIN_REPLICATES if strict else 1} replicates, got {replicates}")


def draw_path(params: ExperimentParams, grid_n: int, seed: int, replicate: int, sigma: Optional[SigmaSpec] = None):
    """
    One realization at the finest grid: (Path, fine_times, fine_values).
    The fine trace is None for exact Gaussian samples.
    """
    if params.process == "u0":
        if params.theta == 1.0:
            return sample_u0_path(params.kernel(), grid_n, seed, replicate), None, None
        return sample_linear_theta_path(params.kernel(), grid_n, params.theta, seed, replicate), None, None
    if params.process != "spde":
        raise InvalidArgumentError(f"process must be 'u0' or 'spde', got '{params.process}'")
    config = params.sim_config(grid_n, seed, sigma)
    output = simulate(config, replicate) if params.theta == 1.0 else simulate_parametrized(config, replicate)
    return output.path, output.fine_times, output.fine_values


def _rate_task(target: str, params: ExperimentParams, grid: List[int], squared: bool) -> Callable[[int, int], np.ndarray]:
    finest = grid[-1]
    alpha = params.alpha
    if target in ("u0_vn", "nonlinear_vn"):
        c0_sq = c0_alpha(params.kernel()) ** 2 * params.theta ** (-1.0 / alpha)
    if target == "nonlinear_un":
        p = even_power_order(alpha)
        b0 = b0_alpha(params.kernel()) * params.theta ** (-1.0 / (alpha - 1.0))

    def task(seed: int, replicate: int) -> np.ndarray:
        fine_times = fine_values = None
        if target == "fbm_vn":
            path = sample_fbm(params.hurst, finest, seed, replicate)
        elif target == "perturbed_vn":
            spec = PerturbedFbmSpec(params.c0, params.hurst, params.perturbation_scale)
            path = sample_perturbed_fbm(spec, finest, seed, replicate)
        elif target == "u0_vn":
            path, _, _ = draw_path(replace(params, process="u0"), finest, seed, replicate)
        else:
            path, fine_times, fine_values = draw_path(replace(params, process="spde"), finest, seed, replicate)

        if target == "nonlinear_vn":
            limit = c0_sq * pathwise_sigma_integral(fine_times, fine_values, params.sigma, 2)
        elif target == "nonlinear_un":
            limit = b0 * pathwise_sigma_integral(fine_times, fine_values, params.sigma, p)
        elif target == "u0_vn":
            limit = c0_sq
        elif target == "perturbed_vn":
            limit = params.c0 ** 2
        else:
            limit = 1.0

        errors = np.empty(len(grid))
        for k, n in enumerate(grid):
            coarse = path.subsample(finest // n)
            if target in ("fbm_vn", "perturbed_vn"):
                statistic = fbm_normalized_variation(coarse, params.hurst).statistic
            elif target == "nonlinear_un":
                statistic = power_variation(coarse, p).statistic
            else:
                statistic = quad_variation_renorm(coarse, alpha).statistic
            gap = statistic - limit
            errors[k] = gap * gap if squared else abs(gap)
        return errors

    return task


def rate_spec(target: str, params: ExperimentParams) -> RateSpec:
    if target == "fbm_vn":
        return RateSpec(target, -1.0, "fBm quadratic variation, L2 rate 1/N")
    if target == "perturbed_vn":
        return RateSpec(target, perturbed_rate_exponent(params.hurst), "perturbed fBm quadratic variation")
    if target == "u0_vn":
        return RateSpec(target, -1.0, "linear solution quadratic variation, L2 rate 1/N")
    if target in ("nonlinear_vn", "nonlinear_un"):
        return RateSpec(target, nonlinear_rate_exponent(params.alpha), "nonlinear L1 rate")
    raise InvalidArgumentError(f"rate target must be one of {RATE_TARGETS}, got '{target}'")


def run_rate_experiment(target: str, params: ExperimentParams, n_grid: Sequence[int], replicates: int, seed: int,
                        max_workers: Optional[int] = None, strict: bool = True) -> McReport:
    """
    Monte Carlo error curve of one statistic against N.

    Each replicate is drawn once at the largest N; smaller N read the same
    realization through Path.subsample.

    Args:
        target: One of RATE_TARGETS.
        params: Model parameters.
        n_grid: Dyadic grid sizes (at least 4).
        replicates: Replicates per N (at least 100 unless strict=False).
        seed: Base seed.
        max_workers: Thread cap (default VARHEAT_THREADS).
        strict: Enforce the minimum grid and replicate counts.

    Raises:
        ReplicateFailure: a replicate raised (index and seed attached).
    """
    spec = rate_spec(target, params)
    grid = check_grid(n_grid, MIN_GRID_POINTS if strict else 2)
    check_replicates(replicates, strict)
    error_norm = params.error_norm or ("l1" if target.startswith("nonlinear") else "l2")
    if error_norm not in ("l1", "l2"):
        raise InvalidArgumentError(f"error_norm must be 'l1' or 'l2', got '{error_norm}'")
    logger.info(f"🚀 Rate experiment {target}: N={grid}, replicates={replicates}, seed={seed}, norm={error_norm}")
    task = _rate_task(target, params, grid, squared=error_norm == "l2")
    samples = ReplicateRunner(seed, max_workers).run(task, replicates, label=target)
    return build_report(spec, grid, np.vstack(samples), seed, aggregate="mean", error_kind=error_norm,
                        notes={"alpha": params.alpha, "theta": params.theta, "hurst": params.hurst})


@dataclass
class VariationPairReport:
    """V and U rate reports drawn from the same solver realizations."""
    v_report: McReport
    u_report: McReport
    slope_gap: float
    agree: bool

    def to_dict(self):
        return {"v": self.v_report.summary(), "u": self.u_report.summary(),
                "slope_gap": self.slope_gap, "agree": self.agree}


def _pair_task(params: ExperimentParams, grid: List[int]) -> Callable[[int, int], np.ndarray]:
    finest = grid[-1]
    alpha = params.alpha
    c0_sq = c0_alpha(params.kernel()) ** 2 * params.theta ** (-1.0 / alpha)
    p = even_power_order(alpha)
    b0 = b0_alpha(params.kernel()) * params.theta ** (-1.0 / (alpha - 1.0))
    spde = replace(params, process="spde")

    def task(seed: int, replicate: int) -> np.ndarray:
        path, fine_times, fine_values = draw_path(spde, finest, seed, replicate)
        v_limit = c0_sq * pathwise_sigma_integral(fine_times, fine_values, params.sigma, 2)
        u_limit = b0 * pathwise_sigma_integral(fine_times, fine_values, params.sigma, p)
        coarse = [path.subsample(finest // n) for n in grid]
        v_errors = [abs(quad_variation_renorm(c, alpha).statistic - v_limit) for c in coarse]
        u_errors = [abs(power_variation(c, p).statistic - u_limit) for c in coarse]
        return np.asarray(v_errors + u_errors)

    return task


def run_variation_pair(params: ExperimentParams, n_grid: Sequence[int], replicates: int, seed: int,
                       max_workers: Optional[int] = None, strict: bool = True) -> VariationPairReport:
    """
    L1 rates of V_N and U_N for the nonlinear equation from one set of
    solver paths, and whether their fitted slopes agree within
    config.SLOPE_AGREEMENT_TOLERANCE.

    Replicate r sees the same path as replicate r of run_rate_experiment
    with target 'nonlinear_vn' or 'nonlinear_un' and the same seed.
    """
    v_spec = rate_spec("nonlinear_vn", params)
    u_spec = rate_spec("nonlinear_un", params)
    grid = check_grid(n_grid, MIN_GRID_POINTS if strict else 2)
    check_replicates(replicates, strict)
    logger.info(f"🚀 Variation pair: N={grid}, replicates={replicates}, seed={seed}")
    samples = np.vstack(ReplicateRunner(seed, max_workers).run(_pair_task(params, grid), replicates,
                                                               label="nonlinear_pair"))
    notes = {"alpha": params.alpha, "theta": params.theta, "hurst": params.hurst}
    v_report = build_report(v_spec, grid, samples[:, :len(grid)], seed, aggregate="mean", error_kind="l1", notes=notes)
    u_report = build_report(u_spec, grid, samples[:, len(grid):], seed, aggregate="mean", error_kind="l1", notes=notes)
    gap, agree = compare_slopes(v_report, u_report)
    for report in (v_report, u_report):
        report.notes["slope_agreement"] = {"gap": gap, "agree": agree}
    return VariationPairReport(v_report=v_report, u_report=u_report, slope_gap=gap, agree=agree)
