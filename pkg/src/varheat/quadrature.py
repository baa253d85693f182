"""
Adaptive composite Gauss-Legendre quadrature for smooth, rapidly decaying
Fourier-type integrands on a finite interval.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import NumericalFailureError

logger = logging.getLogger(__name__)

DEFAULT_ORDER = 24
DEFAULT_MAX_LEVEL = 48
DEFAULT_MAX_PANELS = 4_000_000


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    panels: int
    levels: int


@lru_cache(maxsize=8)
def _legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel_sums(func: Callable[[np.ndarray], np.ndarray], left: np.ndarray, right: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = _legendre_rule(order)
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    points = mid[:, None] + half[:, None] * nodes[None, :]
    values = func(points)
    return half * (values @ weights)


def integrate_panels(
    func: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
    abs_tol: float,
    max_width: Optional[float] = None,
    order: int = DEFAULT_ORDER,
    max_level: int = DEFAULT_MAX_LEVEL,
    max_panels: int = DEFAULT_MAX_PANELS,
) -> QuadratureResult:
    """
    Integrates a vectorized function over [lower, upper].

    The interval is first cut into equal panels no wider than `max_width`.
    Each panel is accepted when the Gauss-Legendre rule on the panel and on its
    two halves agree within the panel's share of `abs_tol`; otherwise it is
    bisected. All panels of one level are evaluated in a single call.

    Args:
        func: Vectorized integrand, called with 2-D arrays of nodes.
        lower: Left end of the interval.
        upper: Right end of the interval.
        abs_tol: Absolute tolerance on the whole integral.
        max_width: Upper bound on the initial panel width (resolves oscillation).
        order: Number of Gauss-Legendre nodes per panel.
        max_level: Maximum number of bisection levels.
        max_panels: Maximum number of live panels on any level.

    Returns:
        QuadratureResult with the value and the summed error estimate.

    Raises:
        NumericalFailureError: tolerance not met within max_level or max_panels.
    """
    if upper == lower:
        return QuadratureResult(0.0, 0.0, 0, 0)
    span = upper - lower
    n_initial = 1
    if max_width is not None and max_width > 0:
        n_initial = max(1, int(np.ceil(span / max_width)))
    edges = np.linspace(lower, upper, n_initial + 1)
    left, right = edges[:-1], edges[1:]

    total = 0.0
    error = 0.0
    panels_done = 0
    eps = np.finfo(float).eps
    for level in range(max_level + 1):
        if left.size > max_panels:
            raise NumericalFailureError(
                "quadrature panel budget exceeded",
                {"panels": int(left.size), "level": level, "abs_tol": abs_tol, "interval": (lower, upper)},
            )
        mid = 0.5 * (left + right)
        coarse = _panel_sums(func, left, right, order)
        fine = _panel_sums(func, left, mid, order) + _panel_sums(func, mid, right, order)
        diff = np.abs(fine - coarse)
        share = abs_tol * (right - left) / span
        done = (diff <= share) | (diff <= 64 * eps * np.abs(fine))
        total += float(np.sum(fine[done]))
        error += float(np.sum(diff[done]))
        panels_done += int(np.count_nonzero(done))
        if done.all():
            logger.debug(f"Quadrature on [{lower:.4g}, {upper:.4g}] converged: {panels_done} panels, {level} levels")
            return QuadratureResult(total, error, panels_done, level)
        keep = ~done
        left = np.concatenate([left[keep], mid[keep]])
        right = np.concatenate([mid[keep], right[keep]])

    raise NumericalFailureError(
        "quadrature did not converge",
        {
            "abs_tol": abs_tol,
            "interval": (lower, upper),
            "unresolved_panels": int(left.size),
            "worst_panel": (float(left.min()), float(right.max())),
            "max_level": max_level,
        },
    )
