"""
Estimators of the anomality alpha and the drift theta from one observed path,
plus the limits they invert.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from . import config
from .errors import DegenerateInputError, EstimatorUndefinedError, InvalidArgumentError
from .gaussian import Path, b0_alpha, c0_alpha, even_power_order, power_order, variogram_constant_closed_form
from .kernel import KernelParams
from .spde_sim import SigmaSpec
from .variations import power_variation, quad_variation_renorm, riemann_sigma_sum

logger = logging.getLogger(__name__)

TARGETS = ("alpha", "theta")
METHODS = ("log_ratio", "log_ratio_corrected", "quad", "power")
# Root bracket for the bias-corrected alpha; C_{0,alpha} blows up as alpha -> 1.
CORRECTED_BRACKET = (1.05, 2.0)


@dataclass
class EstimateResult:
    estimate: float
    target: str
    method: str
    grid_n: int
    riemann_sum: float
    a_n: Optional[float] = None
    statistic: Optional[float] = None
    constants: Dict[str, float] = field(default_factory=dict)
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def to_json_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"target": self.target, "method": self.method, "estimate": self.estimate,
                                "n": self.grid_n}
        if self.a_n is not None:
            data["a_n"] = self.a_n
        if self.statistic is not None:
            data["statistic"] = self.statistic
        data["riemann_sum"] = self.riemann_sum
        data["constants"] = {k: v for k, v in self.constants.items() if k in ("c0", "b0")}
        if self.diagnostics:
            data["diagnostics"] = self.diagnostics
        return data


def _check_path(path: Path) -> None:
    if not isinstance(path, Path):
        raise InvalidArgumentError(f"expected a Path, got {type(path).__name__}")
    if path.grid_n < 4:
        raise InvalidArgumentError(f"estimators need N >= 4, got {path.grid_n}")


def _riemann(path: Path, sigma: SigmaSpec, q: float, floor: float) -> float:
    value = riemann_sigma_sum(path, sigma, q)
    if not value > floor:
        raise DegenerateInputError(f"Riemann sum of sigma^{q:g} is {value:.3e}, not above the floor {floor:g}")
    return value


def log_ratio_statistic(path: Path, sigma: SigmaSpec, floor: float = config.RIEMANN_FLOOR) -> Tuple[float, float]:
    """(A_N, Riemann sum) with A_N = sum (Delta u)^2 / ((1/N) sum sigma^2(u(t_i)))."""
    _check_path(path)
    riemann = _riemann(path, sigma, 2, floor)
    squares = math.fsum(np.diff(path.values) ** 2)
    if squares == 0.0:
        raise DegenerateInputError("path is constant, sum of squared increments is zero")
    return squares / riemann, riemann


def estimate_alpha(path: Path, sigma: SigmaSpec, floor: float = config.RIEMANN_FLOOR,
                   theta: Optional[float] = None) -> EstimateResult:
    """
    alpha_hat = log N / log A_N. Needs neither theta nor C_{0,alpha}.

    With theta given, diagnostics carry the finite-N offset
    alpha_bias_diagnostic at the plug-in alpha_hat (None when alpha_hat <= 1).

    Raises:
        DegenerateInputError: constant path or vanishing Riemann sum.
        EstimatorUndefinedError: A_N <= 1.
    """
    if theta is not None and not theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    a_n, riemann = log_ratio_statistic(path, sigma, floor)
    if not a_n > 1.0:
        raise EstimatorUndefinedError("A_N <= 1: N too small or path degenerate", {"a_n": a_n, "n": path.grid_n})
    estimate = math.log(path.grid_n) / math.log(a_n)
    logger.debug(f"alpha_hat N={path.grid_n}: A_N={a_n:.6g} -> {estimate:.6f}")
    return EstimateResult(estimate=estimate, target="alpha", method="log_ratio", grid_n=path.grid_n,
                          riemann_sum=riemann, a_n=a_n, diagnostics=_bias_diagnostics(estimate, theta, path.grid_n))


def c0_squared_closed_form(alpha: float) -> float:
    return 2.0 * variogram_constant_closed_form(alpha)


def expected_alpha_hat(alpha: float, theta: float, grid_n: int) -> float:
    """Value of alpha_hat when A_N sits exactly on its leading-order mean C^2 theta^{-1/alpha} N^{1/alpha}."""
    log_n = math.log(grid_n)
    return log_n / (log_n / alpha + math.log(c0_squared_closed_form(alpha) * theta ** (-1.0 / alpha)))


def alpha_bias_diagnostic(alpha: float, theta: float, grid_n: int) -> float:
    """log(C^2 theta^{-1/alpha}) / log N, the finite-N offset in 1/alpha_hat."""
    return math.log(c0_squared_closed_form(alpha) * theta ** (-1.0 / alpha)) / math.log(grid_n)


def _bias_diagnostics(alpha_hat: float, theta: Optional[float], grid_n: int) -> Dict[str, Any]:
    if theta is None:
        return {}
    if not alpha_hat > 1.0:
        return {"theta": theta, "bias_diagnostic": None}
    return {"theta": theta, "bias_diagnostic": alpha_bias_diagnostic(alpha_hat, theta, grid_n)}


def estimate_alpha_corrected(path: Path, sigma: SigmaSpec, theta: float = 1.0,
                             floor: float = config.RIEMANN_FLOOR) -> EstimateResult:
    """
    Solves log A_N = (1/alpha) log N + log C_{0,alpha}^2 - (1/alpha) log theta
    for alpha in [1.05, 2] by Brent's method.

    The right-hand side decreases in alpha. When A_N falls outside its range
    on the bracket the estimate is clamped to the nearer end and
    diagnostics['clamped'] names it ('lower' or 'upper').

    Raises:
        DegenerateInputError: constant path or vanishing Riemann sum.
    """
    if not theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    a_n, riemann = log_ratio_statistic(path, sigma, floor)
    log_a, log_n, log_theta = math.log(a_n), math.log(path.grid_n), math.log(theta)

    def mismatch(alpha: float) -> float:
        # Closed form: every Brent iterate is a new alpha, and c0_alpha would redo the quadrature each time.
        return (log_n - log_theta) / alpha + math.log(c0_squared_closed_form(alpha)) - log_a

    low, high = CORRECTED_BRACKET
    diagnostics: Dict[str, Any] = {"theta": theta}
    if mismatch(high) >= 0:
        estimate = high
        diagnostics["clamped"] = "upper"
    elif mismatch(low) <= 0:
        estimate = low
        diagnostics["clamped"] = "lower"
    else:
        estimate = brentq(mismatch, low, high, xtol=1e-12)
    if "clamped" in diagnostics:
        logger.debug(f"alpha_hat_corrected N={path.grid_n}: A_N={a_n:.6g} outside the bracket, clamped to {estimate}")
    return EstimateResult(estimate=estimate, target="alpha", method="log_ratio_corrected", grid_n=path.grid_n,
                          riemann_sum=riemann, a_n=a_n, diagnostics=diagnostics)


def estimate_theta_quadratic(path: Path, alpha: float, sigma: SigmaSpec, c0: float,
                             floor: float = config.RIEMANN_FLOOR) -> EstimateResult:
    """theta_hat_1 = (V_N / (C_{0,alpha}^2 (1/N) sum sigma^2(u(t_i))))^{-alpha}."""
    _check_path(path)
    if not c0 > 0:
        raise InvalidArgumentError(f"c0 must be positive, got {c0}")
    statistic = quad_variation_renorm(path, alpha).statistic
    if statistic == 0.0:
        raise DegenerateInputError("quadratic variation is zero")
    riemann = _riemann(path, sigma, 2, floor)
    estimate = (statistic / (c0 ** 2 * riemann)) ** (-alpha)
    return EstimateResult(estimate=estimate, target="theta", method="quad", grid_n=path.grid_n,
                          riemann_sum=riemann, statistic=statistic, constants={"c0": c0})


def estimate_theta_power(path: Path, alpha: float, sigma: SigmaSpec, b0: float,
                         floor: float = config.RIEMANN_FLOOR) -> EstimateResult:
    """
    theta_hat_2 = (U_N / (B_{0,alpha} (1/N) sum sigma^p(u(t_i))))^{-(alpha-1)}, p = 2 alpha / (alpha - 1).

    Raises:
        InvalidArgumentError: p is not an even integer.
    """
    _check_path(path)
    p = even_power_order(alpha)
    if not b0 > 0:
        raise InvalidArgumentError(f"b0 must be positive, got {b0}")
    statistic = power_variation(path, p).statistic
    if statistic == 0.0:
        raise DegenerateInputError(f"power variation of order {p} is zero")
    riemann = _riemann(path, sigma, p, floor)
    estimate = (statistic / (b0 * riemann)) ** (-(alpha - 1.0))
    return EstimateResult(estimate=estimate, target="theta", method="power", grid_n=path.grid_n,
                          riemann_sum=riemann, statistic=statistic, constants={"b0": b0})


def theoretical_limits(alpha: float, theta: float, sigma_moment_2: float, sigma_moment_p: float,
                       c0: Optional[float] = None, b0: Optional[float] = None) -> Tuple[float, Optional[float]]:
    """
    (C^2 theta^{-1/alpha} m_2, B theta^{-1/(alpha-1)} m_p).

    The second entry is None when 2 alpha / (alpha - 1) is not an even integer.
    """
    if sigma_moment_2 < 0 or sigma_moment_p < 0:
        raise InvalidArgumentError("sigma moments must be non-negative")
    if not theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    params = KernelParams(alpha)
    c0 = c0_alpha(params) if c0 is None else c0
    v_limit = c0 ** 2 * theta ** (-1.0 / alpha) * sigma_moment_2
    if b0 is None:
        try:
            b0 = b0_alpha(params)
        except InvalidArgumentError:
            logger.debug(f"No U-limit for alpha={alpha}: p={power_order(alpha):.4g} not an even integer")
            return v_limit, None
    return v_limit, b0 * theta ** (-1.0 / (alpha - 1.0)) * sigma_moment_p
