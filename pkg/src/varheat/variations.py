"""
Variation functionals of observed paths and the sigma-moment Riemann sums
that appear in their limits.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from .errors import InvalidArgumentError
from .gaussian import Path
from .spde_sim import SigmaSpec

logger = logging.getLogger(__name__)

VARIATION_KINDS = ("quad_renorm", "power_p", "fbm_norm")


@dataclass(frozen=True)
class VariationResult:
    statistic: float
    kind: str
    grid_n: int
    normalization_exponent: float
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in VARIATION_KINDS:
            raise InvalidArgumentError(f"unknown variation kind '{self.kind}'")
        if not self.statistic >= 0:
            raise InvalidArgumentError(f"variation statistic must be >= 0, got {self.statistic}")
        if self.p is not None and not self.p > 0:
            raise InvalidArgumentError(f"order p must be positive, got {self.p}")


def _increments(path: Path) -> np.ndarray:
    if not isinstance(path, Path):
        raise InvalidArgumentError(f"expected a Path, got {type(path).__name__}")
    if path.grid_n < 2:
        raise InvalidArgumentError(f"variations need N >= 2, got {path.grid_n}")
    return np.diff(path.values)


def _normalized_square_sum(path: Path, exponent: float) -> float:
    increments = _increments(path)
    # math.fsum: exact accumulation of up to 2^14 small squares
    return path.grid_n ** exponent * math.fsum(increments ** 2)


def quad_variation_renorm(path: Path, alpha: float) -> VariationResult:
    """V_N = N^{-1/alpha} sum_i (u(t_{i+1}) - u(t_i))^2."""
    if not (1.0 < alpha <= 2.0):
        raise InvalidArgumentError(f"alpha must lie in (1, 2], got {alpha}")
    hurst = (alpha - 1.0) / (2.0 * alpha)
    exponent = 2.0 * hurst - 1.0
    return VariationResult(statistic=_normalized_square_sum(path, exponent), kind="quad_renorm",
                           grid_n=path.grid_n, normalization_exponent=exponent)


def fbm_normalized_variation(path: Path, hurst: float) -> VariationResult:
    """V_N = N^{2H-1} sum_i (Delta_i)^2."""
    if not (0.0 < hurst < 1.0):
        raise InvalidArgumentError(f"Hurst index must lie in (0, 1), got {hurst}")
    exponent = 2.0 * hurst - 1.0
    return VariationResult(statistic=_normalized_square_sum(path, exponent), kind="fbm_norm",
                           grid_n=path.grid_n, normalization_exponent=exponent)


def power_variation(path: Path, p: float) -> VariationResult:
    """U_N = sum_i |Delta_i|^p, no normalization."""
    if not p > 0:
        raise InvalidArgumentError(f"order p must be positive, got {p}")
    statistic = math.fsum(np.abs(_increments(path)) ** p)
    return VariationResult(statistic=statistic, kind="power_p", grid_n=path.grid_n,
                           normalization_exponent=0.0, p=float(p))


def sigma_power(sigma: SigmaSpec, values: np.ndarray, q: float) -> np.ndarray:
    """sigma(u)^q; integer q keeps the sign structure, other q use |sigma|^q."""
    if not q > 0:
        raise InvalidArgumentError(f"moment order q must be positive, got {q}")
    s = sigma(values)
    if float(q).is_integer():
        return s ** int(q)
    return np.abs(s) ** q


def riemann_sigma_sum(path: Path, sigma: SigmaSpec, q: float) -> float:
    """(1/N) sum_{i=1}^{N} sigma(u(t_i))^q."""
    if path.grid_n < 1:
        raise InvalidArgumentError(f"Riemann sum needs N >= 1, got {path.grid_n}")
    return math.fsum(sigma_power(sigma, path.values[1:], q)) / path.grid_n


def pathwise_sigma_integral(times: np.ndarray, values: np.ndarray, sigma: SigmaSpec, q: float,
                            t_start: float = 0.0, t_end: float = 1.0) -> float:
    """
    int_{t_start}^{t_end} sigma(u(s))^q ds by the trapezoid rule on a fine
    trace of the same realization.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.size < 2:
        raise InvalidArgumentError(f"fine trace needs matching times/values of length >= 2, got {times.shape}, {values.shape}")
    window = (times >= t_start - 1e-12) & (times <= t_end + 1e-12)
    if np.count_nonzero(window) < 2:
        raise InvalidArgumentError(f"fine trace does not cover [{t_start}, {t_end}]")
    return float(trapezoid(sigma_power(sigma, values[window], q), times[window]))


def admissible_alpha(p: int) -> float:
    """The alpha with 2 alpha / (alpha - 1) = p, for even p >= 4."""
    if int(p) != p or p < 4 or int(p) % 2:
        raise InvalidArgumentError(f"p must be an even integer >= 4, got {p}")
    return p / (p - 2.0)


def interval_limit_factor(alpha: float, t_start: float, t_end: float) -> float:
    """(A2 - A1)^{2H - 1}: extra factor of the V-limit on [A1, A2] with the same N^{-1/alpha} normalization."""
    if not (0.0 <= t_start < t_end):
        raise InvalidArgumentError(f"need 0 <= t_start < t_end, got [{t_start}, {t_end}]")
    hurst = (alpha - 1.0) / (2.0 * alpha)
    return (t_end - t_start) ** (2.0 * hurst - 1.0)
