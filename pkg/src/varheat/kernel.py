"""
Green kernel of the fractional heat equation and the L2 integrals built on it.

G_alpha(t, .) is the density of a symmetric alpha-stable law at time t, given
through its Fourier transform exp(-t |xi|^alpha). All evaluations integrate
the even Fourier representation over [0, Xi] with adaptive Gauss-Legendre
panels.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import gamma

from .errors import InvalidArgumentError, NumericalFailureError
from .quadrature import integrate_panels

logger = logging.getLogger(__name__)

# Extra decades of decay beyond abs_tol when choosing Xi automatically.
TAIL_MARGIN = 5.0
# Initial panel count on [0, Xi] for non-oscillatory integrands.
BASE_PANELS = 16
# Normalization is measured on [-R t^{1/alpha}, R t^{1/alpha}] plus an asymptotic tail.
NORMALIZATION_RADIUS = 1000.0
TAIL_SERIES_TERMS = 3
PROPERTY_POINTS = (0.1, 0.5, 1.0, 2.0, 5.0)
SANDWICH_GRID = np.linspace(-5.0, 5.0, 41)


@dataclass(frozen=True)
class KernelParams:
    """
    Order of the fractional Laplacian plus quadrature controls.

    Attributes:
        alpha: Order in (1, 2].
        tail_cutoff: Frequency Xi where integrands are truncated. None picks
            the smallest Xi with exp(-t Xi^alpha) below abs_tol for each t.
        abs_tol: Absolute quadrature tolerance.
    """
    alpha: float
    tail_cutoff: Optional[float] = None
    abs_tol: float = 1e-10

    def __post_init__(self):
        if not (1.0 < self.alpha <= 2.0) or not math.isfinite(self.alpha):
            raise InvalidArgumentError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not self.abs_tol > 0:
            raise InvalidArgumentError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.tail_cutoff is not None and not self.tail_cutoff > 0:
            raise InvalidArgumentError(f"tail_cutoff must be positive, got {self.tail_cutoff}")

    @property
    def hurst(self) -> float:
        """Hurst index (alpha - 1) / (2 alpha) of the solution in time."""
        return (self.alpha - 1.0) / (2.0 * self.alpha)

    def cutoff_for(self, t: float) -> float:
        """Frequency beyond which exp(-t xi^alpha) is below abs_tol."""
        needed = ((math.log(1.0 / self.abs_tol) + TAIL_MARGIN) / t) ** (1.0 / self.alpha)
        if self.tail_cutoff is None:
            return needed
        if math.exp(-t * self.tail_cutoff ** self.alpha) >= self.abs_tol:
            raise InvalidArgumentError(
                f"tail_cutoff={self.tail_cutoff} too small for t={t}: need at least {needed:.6g}"
            )
        return self.tail_cutoff


@dataclass(frozen=True)
class KernelIntegralReport:
    value: float
    bound_constant: float
    inputs: Tuple[float, float, float]


@dataclass(frozen=True)
class KernelPropertyReport:
    alpha: float
    t: float
    normalization_error: float
    symmetry_error: float
    scaling_error: float
    sandwich_lower: float
    sandwich_upper: float


def _check_positive_time(t: float, name: str = "t") -> None:
    if not (t > 0) or not math.isfinite(t):
        raise InvalidArgumentError(f"{name} must be a positive finite time, got {t}")


def _oscillation_width(x: float, cutoff: float) -> float:
    width = cutoff / BASE_PANELS
    if x != 0.0:
        width = min(width, math.pi / (2.0 * abs(x)))
    return width


def green_kernel_value(params: KernelParams, t: float, x: float) -> float:
    """
    G_alpha(t, x) = (1/pi) int_0^Xi cos(x xi) exp(-t xi^alpha) dxi.

    Raises:
        InvalidArgumentError: t <= 0.
        NumericalFailureError: quadrature did not reach params.abs_tol.
    """
    _check_positive_time(t)
    alpha = params.alpha
    cutoff = params.cutoff_for(t)

    def integrand(xi):
        return np.cos(x * xi) * np.exp(-t * xi ** alpha)

    result = integrate_panels(
        integrand, 0.0, cutoff, abs_tol=math.pi * params.abs_tol,
        max_width=_oscillation_width(x, cutoff),
    )
    return result.value / math.pi


def green_kernel_two_sided(params: KernelParams, t: float, x: float) -> complex:
    """
    (2 pi)^{-1} int_{-Xi}^{Xi} exp(-i x xi) exp(-t |xi|^alpha) dxi without folding
    the integrand onto [0, Xi]; the imaginary part is the quadrature residue
    of the odd component.
    """
    _check_positive_time(t)
    alpha = params.alpha
    cutoff = params.cutoff_for(t)
    width = _oscillation_width(x, cutoff)

    def even_part(xi):
        return np.cos(x * xi) * np.exp(-t * np.abs(xi) ** alpha)

    def odd_part(xi):
        return np.sin(x * xi) * np.exp(-t * np.abs(xi) ** alpha)

    tol = 2.0 * math.pi * params.abs_tol
    real = integrate_panels(even_part, -cutoff, cutoff, abs_tol=tol, max_width=width).value
    imag = integrate_panels(odd_part, -cutoff, cutoff, abs_tol=tol, max_width=width).value
    return complex(real, -imag) / (2.0 * math.pi)


def l2_constant(params: KernelParams) -> float:
    """c_alpha = (2 pi)^{-1} int exp(-2 |xi|^alpha) dxi, by quadrature."""
    alpha = params.alpha
    cutoff = params.cutoff_for(2.0)
    result = integrate_panels(
        lambda xi: np.exp(-2.0 * xi ** alpha), 0.0, cutoff,
        abs_tol=math.pi * params.abs_tol, max_width=cutoff / BASE_PANELS,
    )
    return result.value / math.pi


def l2_constant_closed_form(alpha: float) -> float:
    return gamma(1.0 + 1.0 / alpha) * 2.0 ** (-1.0 / alpha) / math.pi


def kernel_l2_time_integral(params: KernelParams, s: float, t: float) -> float:
    """
    int_s^t da int G_alpha(t - a, y)^2 dy = c_alpha alpha/(alpha-1) (t-s)^{1-1/alpha}.

    c_alpha is computed both in closed form and by quadrature; the closed
    form is returned once the two agree.
    """
    if not (0.0 <= s <= t) or not math.isfinite(t):
        raise InvalidArgumentError(f"need 0 <= s <= t, got s={s}, t={t}")
    alpha = params.alpha
    closed = l2_constant_closed_form(alpha)
    numeric = l2_constant(params)
    if abs(numeric - closed) > 1e-7 * closed:
        raise NumericalFailureError(
            "quadrature of c_alpha disagrees with its closed form",
            {"alpha": alpha, "quadrature": numeric, "closed_form": closed},
        )
    return closed * alpha / (alpha - 1.0) * (t - s) ** (1.0 - 1.0 / alpha)


def increment_kernel_integral(params: KernelParams, s: float, t: float, delta: float) -> KernelIntegralReport:
    """
    I(s, t, delta) = (2 pi)^{-1} int (1 - e^{-delta|xi|^a})^2
                     (e^{-2(t-s)|xi|^a} - e^{-2t|xi|^a}) / (2|xi|^a) dxi.

    bound_constant is I / (delta^2 (t-s)^{-(alpha+1)/alpha}).
    """
    if not (0.0 <= s < t) or not math.isfinite(t):
        raise InvalidArgumentError(f"need 0 <= s < t, got s={s}, t={t}")
    if not (delta > 0) or not math.isfinite(delta):
        raise InvalidArgumentError(f"delta must be positive, got {delta}")
    alpha = params.alpha
    gap = t - s
    shape = delta ** 2 * gap ** (-(alpha + 1.0) / alpha)
    cutoff = params.cutoff_for(2.0 * gap)

    def integrand(xi):
        power = xi ** alpha
        smoothing = np.expm1(-delta * power) ** 2
        window = np.exp(-2.0 * gap * power) * -np.expm1(-2.0 * s * power)
        return smoothing * window / (2.0 * power)

    # Tolerance relative to the bound shape so small delta keeps its accuracy.
    result = integrate_panels(
        integrand, 0.0, cutoff, abs_tol=math.pi * params.abs_tol * min(1.0, shape),
        max_width=cutoff / BASE_PANELS,
    )
    value = max(result.value / math.pi, 0.0)
    return KernelIntegralReport(value=value, bound_constant=value / shape, inputs=(s, t, delta))


def _stable_tail_coefficients(alpha: float, terms: int) -> np.ndarray:
    k = np.arange(1, terms + 1)
    signs = (-1.0) ** (k + 1)
    return signs * gamma(k * alpha + 1.0) * np.sin(k * math.pi * alpha / 2.0) / gamma(k + 1.0) / math.pi


def _normalization_error(params: KernelParams, t: float) -> float:
    alpha = params.alpha
    radius = NORMALIZATION_RADIUS * t ** (1.0 / alpha)
    cutoff = params.cutoff_for(t)

    # int_{-R}^{R} G(t, x) dx = (2/pi) int_0^inf e^{-t xi^a} sin(R xi) / xi dxi
    def integrand(xi):
        return np.exp(-t * xi ** alpha) * radius * np.sinc(radius * xi / math.pi)

    inner = integrate_panels(
        integrand, 0.0, cutoff, abs_tol=0.5 * math.pi * params.abs_tol,
        max_width=math.pi / (2.0 * radius),
    ).value * 2.0 / math.pi
    # G(t, x) ~ sum_k c_k t^k |x|^{-k alpha - 1} for large |x|
    k = np.arange(1, TAIL_SERIES_TERMS + 1)
    coeffs = _stable_tail_coefficients(alpha, TAIL_SERIES_TERMS)
    tail = 2.0 * float(np.sum(coeffs * t ** k * radius ** (-k * alpha) / (k * alpha)))
    logger.debug(f"Normalization alpha={alpha} t={t}: inner={inner:.12f} tail={tail:.3e}")
    return abs(inner + tail - 1.0)


def kernel_property_check(params: KernelParams, t: float) -> KernelPropertyReport:
    """
    Measures normalization, symmetry (G(t, -x) from the unfolded two-sided
    integral against the folded G(t, x)), scaling and the two-sided power-law
    envelope G(t,x) (1 + |t^{-1/a} x|)^{1+a} t^{1/a} on a fixed grid.

    Raises:
        InvalidArgumentError: t <= 0.
        NumericalFailureError: a kernel value is not positive.
    """
    _check_positive_time(t)
    alpha = params.alpha
    scale = t ** (1.0 / alpha)

    symmetry_error = 0.0
    scaling_error = 0.0
    for z in PROPERTY_POINTS:
        x = z * scale
        g_plus = green_kernel_value(params, t, x)
        g_minus = green_kernel_two_sided(params, t, -x)
        symmetry_error = max(symmetry_error, abs(g_plus - g_minus.real), abs(g_minus.imag))
        rescaled = green_kernel_value(params, 1.0, x / scale) / scale
        scaling_error = max(scaling_error, abs(g_plus - rescaled))

    ratios = []
    for z in SANDWICH_GRID:
        value = green_kernel_value(params, t, z * scale)
        if not value > 0:
            raise NumericalFailureError("Green kernel not positive", {"alpha": alpha, "t": t, "x": z * scale, "value": value})
        ratios.append(value * (1.0 + abs(z)) ** (1.0 + alpha) * scale)

    report = KernelPropertyReport(
        alpha=alpha,
        t=t,
        normalization_error=_normalization_error(params, t),
        symmetry_error=symmetry_error,
        scaling_error=scaling_error,
        sandwich_lower=float(min(ratios)),
        sandwich_upper=float(max(ratios)),
    )
    logger.info(
        f"Kernel check alpha={alpha} t={t}: norm={report.normalization_error:.2e} "
        f"sym={report.symmetry_error:.2e} scale={report.scaling_error:.2e} "
        f"K'={report.sandwich_lower:.4f} K={report.sandwich_upper:.4f}"
    )
    return report
