"""
Exact-in-law Gaussian machinery: fractional Brownian motion, perturbed fBm,
the correlation function rho_H, and the time covariance of the linear
solution u0 together with the constants C_{0,alpha} and B_{0,alpha}.
"""
import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.special import factorial2, gamma

from . import config
from .errors import InvalidArgumentError, NumericalFailureError
from .kernel import BASE_PANELS, KernelParams
from .quadrature import integrate_panels
from .random_streams import PERTURBATION, PRIMARY_NOISE, stream

logger = logging.getLogger(__name__)

PROVENANCE_TAGS = ("fbm", "perturbed", "u0-exact", "spde-numeric")
# Eigenvalues in [-PSD_TOLERANCE * lambda_max, 0) are treated as zero.
PSD_TOLERANCE = 1e-8
RICHARDSON_LADDER = tuple(range(6, 15))
RICHARDSON_STABILITY = 1e-3


@dataclass
class Path:
    """
    Observation of a process at a fixed spatial point on an equidistant grid
    t_i = t_start + i (t_end - t_start) / grid_n, i = 0..grid_n.
    """
    values: np.ndarray
    grid_n: int
    spatial_point: float = 0.0
    meta: str = "fbm"
    t_start: float = 0.0
    t_end: float = 1.0
    attributes: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size != self.grid_n + 1:
            raise InvalidArgumentError(
                f"path needs grid_n + 1 = {self.grid_n + 1} values, got shape {self.values.shape}"
            )
        if self.meta not in PROVENANCE_TAGS:
            raise InvalidArgumentError(f"unknown provenance tag '{self.meta}', expected one of {PROVENANCE_TAGS}")
        if not self.t_end > self.t_start:
            raise InvalidArgumentError(f"t_end must exceed t_start, got [{self.t_start}, {self.t_end}]")

    @property
    def times(self) -> np.ndarray:
        return self.t_start + (self.t_end - self.t_start) * np.arange(self.grid_n + 1) / self.grid_n

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def subsample(self, factor: int) -> "Path":
        """Path on the coarser grid grid_n / factor (same realization)."""
        if factor < 1 or self.grid_n % factor:
            raise InvalidArgumentError(f"subsample factor {factor} does not divide grid_n={self.grid_n}")
        return replace(self, values=self.values[::factor].copy(), grid_n=self.grid_n // factor,
                       attributes=dict(self.attributes))

    def scaled(self, factor: float) -> "Path":
        return replace(self, values=self.values * factor, attributes=dict(self.attributes))


@dataclass(frozen=True)
class PerturbedFbmSpec:
    """X_t = c0 B^H_t + perturbation_scale * t^H * Z."""
    c0: float
    hurst: float
    perturbation_scale: float = 0.0

    def __post_init__(self):
        if not self.c0 > 0:
            raise InvalidArgumentError(f"c0 must be positive, got {self.c0}")
        _check_hurst(self.hurst)


@dataclass
class CovarianceMatrix:
    entries: np.ndarray
    builder: str

    def smallest_eigenvalue(self) -> Tuple[float, float]:
        """(smallest, largest) eigenvalue."""
        eig = scipy.linalg.eigvalsh(self.entries)
        return float(eig[0]), float(eig[-1])

    def is_psd(self, tolerance: float = PSD_TOLERANCE) -> bool:
        low, high = self.smallest_eigenvalue()
        return low >= -tolerance * max(high, 0.0)


def _check_hurst(hurst: float) -> None:
    if not (0.0 < hurst < 1.0):
        raise InvalidArgumentError(f"Hurst index must lie in (0, 1), got {hurst}")


def _check_grid(grid_n: int, minimum: int = 2) -> None:
    if int(grid_n) != grid_n or grid_n < minimum:
        raise InvalidArgumentError(f"grid_n must be an integer >= {minimum}, got {grid_n}")


# --- fBm ---

def fbm_covariance(hurst: float, s, t):
    """(t^{2H} + s^{2H} - |t-s|^{2H}) / 2."""
    _check_hurst(hurst)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(t < 0):
        raise InvalidArgumentError("fbm_covariance needs non-negative times")
    h2 = 2.0 * hurst
    value = 0.5 * (t ** h2 + s ** h2 - np.abs(t - s) ** h2)
    return float(value) if value.ndim == 0 else value


def rho(hurst: float, v):
    """rho_H(v) = (|v+1|^{2H} + |v-1|^{2H} - 2|v|^{2H}) / 2."""
    v = np.abs(np.asarray(v, dtype=float))
    h2 = 2.0 * hurst
    value = 0.5 * ((v + 1.0) ** h2 + np.abs(v - 1.0) ** h2 - 2.0 * v ** h2)
    return float(value) if value.ndim == 0 else value


def normalized_increment_second_moment(hurst: float, grid_n: int, index: int) -> float:
    """
    E[N^{2H-1} (B_{t_{i+1}} - B_{t_i})^2 - 1/N]^2 computed from the covariance
    function (the variance of a centered squared Gaussian is 2 var^2).
    """
    _check_grid(grid_n, 1)
    s, t = index / grid_n, (index + 1) / grid_n
    var = fbm_covariance(hurst, t, t) + fbm_covariance(hurst, s, s) - 2.0 * fbm_covariance(hurst, s, t)
    scaled = grid_n ** (2.0 * hurst - 1.0) * var
    return 2.0 * scaled ** 2 + (scaled - 1.0 / grid_n) ** 2


def rho_square_partial_sums(hurst: float, n_terms: int) -> np.ndarray:
    return np.cumsum(rho(hurst, np.arange(1, n_terms + 1)) ** 2)


def perturbed_rate_exponent(hurst: float) -> float:
    """Exponent of N in the L2 rate of V_N for perturbed fBm."""
    _check_hurst(hurst)
    if hurst >= 0.75:
        raise InvalidArgumentError(f"no quadratic-variation limit theorem for H >= 3/4, got {hurst}")
    if hurst <= 0.5:
        # H = 1/2 carries an extra log N factor.
        return -1.0
    return 2.0 * hurst - 2.0


@lru_cache(maxsize=32)
def _circulant_eigenvalues(autocov_key: Tuple[float, ...]) -> np.ndarray:
    row = np.asarray(autocov_key)
    embedding = np.concatenate([row, row[-2:0:-1]])
    eig = np.fft.fft(embedding).real
    eig.setflags(write=False)
    return eig


def sample_stationary_gaussian(autocov: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """
    One exact draw of a stationary Gaussian sequence with the given
    autocovariance (lags 0..n-1), by circulant embedding with a
    covariance-factorization fallback.

    Raises:
        NumericalFailureError: neither the embedding nor the Toeplitz
            covariance is numerically nonnegative-definite.
    """
    autocov = np.asarray(autocov, dtype=float)
    n = autocov.size
    if n == 1:
        return np.sqrt(max(autocov[0], 0.0)) * gen.standard_normal(1)
    eig = _circulant_eigenvalues(tuple(autocov.tolist()))
    m = eig.size
    if eig.min() >= -PSD_TOLERANCE * eig.max():
        weights = np.sqrt(np.clip(eig, 0.0, None) / m)
        noise = gen.standard_normal(m) + 1j * gen.standard_normal(m)
        return np.fft.fft(weights * noise).real[:n]

    logger.warning(f"Circulant embedding indefinite (min eig {eig.min():.3e}); falling back to factorization")
    factor = _psd_factor(scipy.linalg.toeplitz(autocov), builder="stationary")
    return factor @ gen.standard_normal(n)


def _psd_factor(matrix: np.ndarray, builder: str) -> np.ndarray:
    eigval, eigvec = scipy.linalg.eigh(matrix)
    top = max(eigval[-1], 0.0)
    if eigval[0] < -PSD_TOLERANCE * top:
        raise NumericalFailureError(
            f"{builder} covariance is indefinite",
            {"smallest_eigenvalue": float(eigval[0]), "largest_eigenvalue": float(top), "size": matrix.shape[0]},
        )
    clamped = int(np.count_nonzero(eigval < 0))
    if clamped:
        logger.debug(f"Clamped {clamped} slightly negative eigenvalues of the {builder} covariance")
    return eigvec * np.sqrt(np.clip(eigval, 0.0, None))


def sample_fbm(hurst: float, grid_n: int, seed: int, replicate: int = 0, t_end: float = 1.0) -> Path:
    """
    Exact sample of (B^H_{t_0}, ..., B^H_{t_N}) on t_i = i t_end / N.

    Increments are drawn as fractional Gaussian noise by circulant embedding
    and scaled by (t_end / N)^H.
    """
    _check_hurst(hurst)
    _check_grid(grid_n)
    gen = stream(seed, replicate, PRIMARY_NOISE)
    noise = sample_stationary_gaussian(rho(hurst, np.arange(grid_n)), gen)
    increments = noise * (t_end / grid_n) ** hurst
    values = np.concatenate([[0.0], np.cumsum(increments)])
    return Path(values=values, grid_n=grid_n, meta="fbm", t_end=t_end,
                attributes={"hurst": hurst, "seed": seed, "replicate": replicate})


def sample_perturbed_fbm(spec: PerturbedFbmSpec, grid_n: int, seed: int, replicate: int = 0) -> Path:
    """
    X_{t_i} = c0 B^H_{t_i} + c_Y t_i^H Z with Z standard normal, independent of B^H.

    Y_t = c_Y t^H Z is centered, Gaussian, H-self-similar and has consecutive
    increment variance c_Y^2 ((i+1)^H - i^H)^2 <= c_Y^2 H^2 i^{2H-2}.
    """
    base = sample_fbm(spec.hurst, grid_n, seed, replicate)
    z = stream(seed, replicate, PERTURBATION).standard_normal()
    times = base.times
    values = spec.c0 * base.values + spec.perturbation_scale * times ** spec.hurst * z
    return Path(values=values, grid_n=grid_n, meta="perturbed",
                attributes={"hurst": spec.hurst, "c0": spec.c0, "c_y": spec.perturbation_scale,
                            "seed": seed, "replicate": replicate})


# --- linear solution u0 ---

@lru_cache(maxsize=64)
def variogram_constant(params: KernelParams) -> float:
    """
    K_alpha = (1/pi) int_0^inf (1 - exp(-eta^alpha)) / (2 eta^alpha) d eta.

    The integrand decays like eta^{-alpha}/2; the quadrature runs on [0, Xi]
    and the tail beyond Xi is added in closed form.
    """
    alpha = params.alpha
    cutoff = params.cutoff_for(1.0)

    def integrand(eta):
        power = eta ** alpha
        return -np.expm1(-power) / (2.0 * power)

    body = integrate_panels(integrand, 0.0, cutoff, abs_tol=math.pi * params.abs_tol,
                            max_width=cutoff / BASE_PANELS).value
    tail = cutoff ** (1.0 - alpha) / (2.0 * (alpha - 1.0))
    value = (body + tail) / math.pi
    closed = variogram_constant_closed_form(alpha)
    logger.debug(f"K_alpha alpha={alpha}: quadrature={value:.14f} closed={closed:.14f}")
    if abs(value - closed) > 1e-6 * closed:
        raise NumericalFailureError("variogram constant quadrature disagrees with closed form",
                                    {"alpha": alpha, "quadrature": value, "closed_form": closed})
    return value


def variogram_constant_closed_form(alpha: float) -> float:
    return gamma(1.0 / alpha) / (2.0 * math.pi * (alpha - 1.0))


def _u0_covariance_array(params: KernelParams, s: np.ndarray, t: np.ndarray) -> np.ndarray:
    gamma_exp = 1.0 - 1.0 / params.alpha
    return variogram_constant(params) * ((t + s) ** gamma_exp - np.abs(t - s) ** gamma_exp)


def u0_time_covariance(params: KernelParams, s: float, t: float) -> float:
    """
    E[u0(s, x) u0(t, x)] = (2 pi)^{-1} int (e^{-|t-s||xi|^a} - e^{-(t+s)|xi|^a}) / (2|xi|^a) dxi.

    The integral scales exactly, so it equals K_alpha [(t+s)^{1-1/a} - |t-s|^{1-1/a}]
    with K_alpha computed once by quadrature.
    """
    if not (s >= 0 and t >= 0) or not (math.isfinite(s) and math.isfinite(t)):
        raise InvalidArgumentError(f"times must be non-negative, got s={s}, t={t}")
    return float(_u0_covariance_array(params, np.float64(s), np.float64(t)))


def u0_covariance_closed_form(alpha: float, s: float, t: float) -> float:
    gamma_exp = 1.0 - 1.0 / alpha
    return variogram_constant_closed_form(alpha) * ((t + s) ** gamma_exp - abs(t - s) ** gamma_exp)


def u0_covariance_matrix(params: KernelParams, grid_n: int, t_start: float = 0.0, t_end: float = 1.0) -> CovarianceMatrix:
    times = t_start + (t_end - t_start) * np.arange(grid_n + 1) / grid_n
    entries = _u0_covariance_array(params, times[:, None], times[None, :])
    return CovarianceMatrix(entries=entries, builder="u0")


def fbm_covariance_matrix(hurst: float, grid_n: int, t_end: float = 1.0) -> CovarianceMatrix:
    times = t_end * np.arange(grid_n + 1) / grid_n
    return CovarianceMatrix(entries=fbm_covariance(hurst, times[:, None], times[None, :]), builder="fbm")


class U0Sampler:
    """
    Exact sampler of u0 at a fixed point on an equidistant time grid.

    The covariance is factorized once (Cholesky, eigen-decomposition with
    clamping as fallback); every call to `sample` costs one matrix-vector
    product.
    """

    def __init__(self, params: KernelParams, grid_n: int, t_start: float = 0.0, t_end: float = 1.0,
                 max_n: Optional[int] = None):
        _check_grid(grid_n)
        max_n = max_n if max_n is not None else config.u0_factorization_cap()
        if grid_n > max_n:
            raise InvalidArgumentError(f"grid_n={grid_n} exceeds the u0 factorization cap {max_n}")
        if not (0.0 <= t_start < t_end):
            raise InvalidArgumentError(f"need 0 <= t_start < t_end, got [{t_start}, {t_end}]")
        self.params = params
        self.grid_n = grid_n
        self.t_start = t_start
        self.t_end = t_end
        matrix = u0_covariance_matrix(params, grid_n, t_start, t_end).entries
        # u0(0) = 0: drop the degenerate first row and column.
        self._offset = 1 if t_start == 0.0 else 0
        reduced = matrix[self._offset:, self._offset:]
        try:
            self._factor = scipy.linalg.cholesky(reduced, lower=True, overwrite_a=True, check_finite=False)
            logger.debug(f"u0 covariance factorized by Cholesky (alpha={params.alpha}, N={grid_n})")
        except scipy.linalg.LinAlgError:
            logger.warning(f"Cholesky failed for u0 covariance (alpha={params.alpha}, N={grid_n}); using eigh")
            self._factor = _psd_factor(u0_covariance_matrix(params, grid_n, t_start, t_end).entries[self._offset:, self._offset:], "u0")

    def sample(self, seed: int, replicate: int = 0) -> Path:
        gen = stream(seed, replicate, PRIMARY_NOISE)
        draw = self._factor @ gen.standard_normal(self._factor.shape[1])
        values = np.concatenate([[0.0], draw]) if self._offset else draw
        return Path(values=values, grid_n=self.grid_n, meta="u0-exact", t_start=self.t_start, t_end=self.t_end,
                    attributes={"alpha": self.params.alpha, "seed": seed, "replicate": replicate})


_SAMPLER_CACHE: "OrderedDict[tuple, U0Sampler]" = OrderedDict()
_SAMPLER_LOCK = threading.Lock()
SAMPLER_CACHE_SIZE = 2


def u0_sampler(params: KernelParams, grid_n: int, t_start: float = 0.0, t_end: float = 1.0) -> U0Sampler:
    """Shared, read-only sampler for (params, grid_n, interval)."""
    key = (params, grid_n, t_start, t_end)
    with _SAMPLER_LOCK:
        sampler = _SAMPLER_CACHE.get(key)
        if sampler is None:
            sampler = U0Sampler(params, grid_n, t_start, t_end)
            _SAMPLER_CACHE[key] = sampler
            while len(_SAMPLER_CACHE) > SAMPLER_CACHE_SIZE:
                _SAMPLER_CACHE.popitem(last=False)
        else:
            _SAMPLER_CACHE.move_to_end(key)
        return sampler


def sample_u0_path(params: KernelParams, grid_n: int, seed: int, replicate: int = 0,
                   t_start: float = 0.0, t_end: float = 1.0) -> Path:
    """One exact-in-law sample of u0 on the grid; deterministic given (alpha, N, seed, replicate)."""
    return u0_sampler(params, grid_n, t_start, t_end).sample(seed, replicate)


def sample_linear_theta_path(params: KernelParams, grid_n: int, theta: float, seed: int, replicate: int = 0) -> Path:
    """
    Exact sample of u_theta (sigma = 1) on t_i = i/N.

    u_theta(t) = theta^{-1/2} u0(theta t) in law, so u0 is sampled on
    [0, theta] and rescaled.
    """
    if not theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    path = sample_u0_path(params, grid_n, seed, replicate, 0.0, theta)
    return Path(values=path.values / math.sqrt(theta), grid_n=grid_n, meta="u0-exact",
                attributes={**path.attributes, "theta": theta})


# --- constants ---

def _increment_variance(params: KernelParams, t: float, delta: float) -> float:
    cov = u0_time_covariance
    return cov(params, t + delta, t + delta) + cov(params, t, t) - 2.0 * cov(params, t, t + delta)


def c0_alpha(params: KernelParams, base_point: float = 1.0) -> float:
    """
    C_{0,alpha} = sqrt(lim delta^{-2H} E(u0(t+delta) - u0(t))^2), extracted on
    the ladder delta = 2^-6 .. 2^-14 with first-order Richardson extrapolation.

    Raises:
        NumericalFailureError: the last two extrapolated values differ by more
            than 1e-3 relative.
    """
    if not base_point > 0:
        raise InvalidArgumentError(f"base_point must be positive, got {base_point}")
    hurst = params.hurst
    order = 2.0 - 2.0 * hurst
    ratio = 2.0 ** order
    normalized = [
        _increment_variance(params, base_point, 2.0 ** -k) * (2.0 ** -k) ** (-2.0 * hurst)
        for k in RICHARDSON_LADDER
    ]
    extrapolated = [(ratio * fine - coarse) / (ratio - 1.0) for coarse, fine in zip(normalized, normalized[1:])]
    last, previous = extrapolated[-1], extrapolated[-2]
    if not last > 0 or abs(last - previous) > RICHARDSON_STABILITY * abs(last):
        raise NumericalFailureError("C_{0,alpha} extrapolation is not stable",
                                    {"alpha": params.alpha, "last": last, "previous": previous})
    logger.debug(f"C0^2 alpha={params.alpha}: extrapolated={last:.10f}, 2K={2 * variogram_constant(params):.10f}")
    return math.sqrt(last)


def power_order(alpha: float) -> float:
    return 2.0 * alpha / (alpha - 1.0)


def even_power_order(alpha: float, tolerance: float = 1e-9) -> int:
    """2 alpha / (alpha - 1) as an even integer, or invalid-argument."""
    p = power_order(alpha)
    rounded = int(round(p))
    if abs(p - rounded) > tolerance or rounded % 2:
        raise InvalidArgumentError(f"2 alpha/(alpha-1) = {p:.6g} is not an even integer (alpha={alpha})")
    return rounded


def b0_alpha(params: KernelParams) -> float:
    """B_{0,alpha} = C_{0,alpha}^p E|Z|^p with p = 2 alpha/(alpha - 1) even, E|Z|^p = (p-1)!!."""
    p = even_power_order(params.alpha)
    return c0_alpha(params) ** p * float(factorial2(p - 1, exact=True))
