"""
Consistency experiments for the estimators: median absolute (alpha) or
relative (theta) error as a function of N.
"""
import logging
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidArgumentError
from ..estimators import (
    estimate_alpha, estimate_alpha_corrected, estimate_theta_power, estimate_theta_quadratic,
)
from ..gaussian import b0_alpha, c0_alpha, even_power_order
from ..spde_sim import SigmaSpec
from .rates import ExperimentParams, check_grid, check_replicates, draw_path
from .report import McReport, RateSpec, build_report
from .runner import ReplicateRunner

logger = logging.getLogger(__name__)

ESTIMATOR_TARGETS = ("alpha_hat", "alpha_hat_corrected", "theta1", "theta2")


def run_estimator_experiment(target: str, params: ExperimentParams, n_grid: Sequence[int], replicates: int,
                             seed: int, max_workers: Optional[int] = None, strict: bool = True) -> McReport:
    """
    Median estimator error per N on realizations drawn at the largest N.

    The linear case (process 'u0') uses sigma = 1; process 'spde' uses the
    configured sigma.

    Raises:
        InvalidArgumentError: unknown target, or theta2 with 2 alpha/(alpha-1) not an even integer.
        ReplicateFailure: a replicate raised.
    """
    if target not in ESTIMATOR_TARGETS:
        raise InvalidArgumentError(f"estimator target must be one of {ESTIMATOR_TARGETS}, got '{target}'")
    grid = check_grid(n_grid, 1)
    check_replicates(replicates, strict)
    finest = grid[-1]
    alpha, theta = params.alpha, params.theta
    sigma = SigmaSpec.constant(1.0) if params.process == "u0" else params.sigma
    c0 = b0 = None
    if target == "theta2":
        even_power_order(alpha)
        b0 = b0_alpha(params.kernel())
    elif target == "theta1":
        c0 = c0_alpha(params.kernel())
    logger.info(f"🚀 Estimator experiment {target}: process={params.process} alpha={alpha} theta={theta} "
                f"N={grid} replicates={replicates}")

    def task(run_seed: int, replicate: int) -> np.ndarray:
        path, _, _ = draw_path(params, finest, run_seed, replicate, sigma)
        errors = np.empty(len(grid))
        for k, n in enumerate(grid):
            coarse = path.subsample(finest // n)
            if target == "alpha_hat":
                errors[k] = abs(estimate_alpha(coarse, sigma).estimate - alpha)
            elif target == "alpha_hat_corrected":
                errors[k] = abs(estimate_alpha_corrected(coarse, sigma, theta).estimate - alpha)
            elif target == "theta1":
                errors[k] = abs(estimate_theta_quadratic(coarse, alpha, sigma, c0).estimate / theta - 1.0)
            else:
                errors[k] = abs(estimate_theta_power(coarse, alpha, sigma, b0).estimate / theta - 1.0)
        return errors

    samples = ReplicateRunner(seed, max_workers).run(task, replicates, label=target)
    kind = "median_abs" if target.startswith("alpha") else "median_rel"
    return build_report(RateSpec(target, None, "estimator consistency"), grid, np.vstack(samples), seed,
                        aggregate="median", error_kind=kind,
                        notes={"alpha": alpha, "theta": theta, "process": params.process})
