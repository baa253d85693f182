"""
Spectral simulation of the fractional stochastic heat equation

    du = -theta (-Delta)^{alpha/2} u dt + sigma(u) W(dt, dx),   u(0, .) = 0,

on the periodized domain [0, 2L). The fractional Laplacian is diagonal on the
periodic frequencies; noise enters as i.i.d. cell increments in physical space
and sigma is evaluated pointwise each step (pseudo-spectral).
"""
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from scipy.special import gamma, gammaincc

from .errors import InvalidArgumentError, NumericalFailureError
from .gaussian import Path, sample_stationary_gaussian
from .random_streams import INDEPENDENT_COPY, PRIMARY_NOISE, SUBGRID_CLOSURE, stream

logger = logging.getLogger(__name__)

SIGMA_KINDS = ("constant", "affine", "sinusoidal")
SCHEMES = ("exact_variance", "exponential_euler")
MIN_SPACE_POINTS = 256
DOMAIN_SPREAD = 5.0
MIN_STEPS_PER_DELTA = 16
# Steps of white noise drawn per generator call.
NOISE_BLOCK = 256


@dataclass(frozen=True)
class SigmaSpec:
    """
    Diffusion coefficient sigma(x).

    constant: c.  affine: a + b x.  sinusoidal: a + b sin(omega x).
    """
    kind: str
    params: Tuple[float, ...]

    def __post_init__(self):
        expected = {"constant": 1, "affine": 2, "sinusoidal": 3}
        if self.kind not in expected:
            raise InvalidArgumentError(f"sigma kind must be one of {SIGMA_KINDS}, got '{self.kind}'")
        params = tuple(float(p) for p in self.params)
        if len(params) != expected[self.kind]:
            raise InvalidArgumentError(f"sigma '{self.kind}' takes {expected[self.kind]} parameters, got {len(params)}")
        if not all(math.isfinite(p) for p in params):
            raise InvalidArgumentError(f"sigma parameters must be finite, got {params}")
        object.__setattr__(self, "params", params)

    @classmethod
    def constant(cls, c: float = 1.0) -> "SigmaSpec":
        return cls("constant", (c,))

    @classmethod
    def affine(cls, a: float, b: float) -> "SigmaSpec":
        return cls("affine", (a, b))

    @classmethod
    def sinusoidal(cls, a: float, b: float, omega: float = 1.0) -> "SigmaSpec":
        return cls("sinusoidal", (a, b, omega))

    @classmethod
    def parse(cls, text: str) -> "SigmaSpec":
        """'constant:1', 'affine:1,0.5', 'sinusoidal:1,0.5,1'."""
        kind, _, rest = text.partition(":")
        try:
            params = tuple(float(p) for p in rest.split(",")) if rest else ()
        except ValueError:
            raise InvalidArgumentError(f"cannot parse sigma '{text}'")
        return cls(kind.strip(), params)

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    @property
    def lipschitz_constant(self) -> float:
        if self.kind == "constant":
            return 0.0
        if self.kind == "affine":
            return abs(self.params[1])
        return abs(self.params[1] * self.params[2])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            return np.full_like(x, self.params[0])
        if self.kind == "affine":
            a, b = self.params
            return a + b * x
        a, b, omega = self.params
        return a + b * np.sin(omega * x)

    def scaled(self, factor: float) -> "SigmaSpec":
        """factor * sigma, same kind."""
        if self.kind == "sinusoidal":
            a, b, omega = self.params
            return SigmaSpec(self.kind, (a * factor, b * factor, omega))
        return SigmaSpec(self.kind, tuple(p * factor for p in self.params))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "params": list(self.params)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SigmaSpec":
        return cls(data["kind"], tuple(data["params"]))


@dataclass(frozen=True)
class SimConfig:
    """
    Solver configuration.

    Attributes:
        alpha: Order in (1, 2].
        theta: Drift parameter > 0.
        sigma: Diffusion coefficient.
        grid_n: Number of observation intervals N on [0, 1].
        n_time: Total solver steps over [0, t_horizon]. None derives the step
            from steps_per_observation and the resolution balance dt <= dx^alpha.
        n_space: Spatial grid points (power of two >= 256).
        half_length: L of the periodic domain [0, 2L); None picks 5 t_horizon^{1/alpha}.
        observe_x: Observation point; None is the domain center L.
        seed: Base seed.
        t_horizon: Simulated horizon (>= 1, and >= theta for the rescaled solver).
        steps_per_observation: Minimum fine steps per observation interval.
        subgrid_closure: Add the stationary contribution of frequencies above
            the grid Nyquist frequency to the observed path.
        scheme: 'exact_variance' weights each mode's noise by its exact
            one-step variance; 'exponential_euler' applies the semigroup to
            the noise as well.
        snapshot_every: Keep the full field every k observation steps.
    """
    alpha: float
    theta: float = 1.0
    sigma: SigmaSpec = field(default_factory=SigmaSpec.constant)
    grid_n: int = 1024
    n_time: Optional[int] = None
    n_space: int = 1024
    half_length: Optional[float] = None
    observe_x: Optional[float] = None
    seed: int = 0
    t_horizon: float = 1.0
    steps_per_observation: int = 16
    subgrid_closure: bool = True
    scheme: str = "exact_variance"
    snapshot_every: Optional[int] = None

    def validate(self) -> "SimConfig":
        """Checks all invariants and returns a copy with derived defaults filled in."""
        if not (1.0 < self.alpha <= 2.0):
            raise InvalidArgumentError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not self.theta > 0:
            raise InvalidArgumentError(f"theta must be positive, got {self.theta}")
        if not isinstance(self.sigma, SigmaSpec):
            raise InvalidArgumentError(f"sigma must be a SigmaSpec, got {type(self.sigma).__name__}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 2:
            raise InvalidArgumentError(f"grid_n must be an integer >= 2, got {self.grid_n}")
        n = self.n_space
        if int(n) != n or n < MIN_SPACE_POINTS or n & (n - 1):
            raise InvalidArgumentError(f"n_space must be a power of two >= {MIN_SPACE_POINTS}, got {n}")
        if not self.t_horizon >= 1.0:
            raise InvalidArgumentError(f"t_horizon must be >= 1, got {self.t_horizon}")
        if self.scheme not in SCHEMES:
            raise InvalidArgumentError(f"scheme must be one of {SCHEMES}, got '{self.scheme}'")
        if self.steps_per_observation < 1:
            raise InvalidArgumentError(f"steps_per_observation must be >= 1, got {self.steps_per_observation}")
        if self.seed < 0:
            raise InvalidArgumentError(f"seed must be non-negative, got {self.seed}")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise InvalidArgumentError(f"snapshot_every must be >= 1, got {self.snapshot_every}")

        min_length = DOMAIN_SPREAD * self.t_horizon ** (1.0 / self.alpha)
        half_length = min_length if self.half_length is None else float(self.half_length)
        if half_length < min_length * (1.0 - 1e-12):
            raise InvalidArgumentError(f"half_length={half_length} below 5 t_horizon^(1/alpha) = {min_length:.6g}")
        observe_x = half_length if self.observe_x is None else float(self.observe_x)
        if not (0.0 <= observe_x < 2.0 * half_length):
            raise InvalidArgumentError(f"observe_x={observe_x} outside [0, {2 * half_length})")
        if self.n_time is not None:
            dx = 2.0 * half_length / n
            dt = self.t_horizon / self.n_time
            if self.n_time < 1 or dt > dx ** self.alpha * (1.0 + 1e-12):
                raise InvalidArgumentError(
                    f"time step {dt:.3e} violates dt <= dx^alpha = {dx ** self.alpha:.3e}"
                )
        return replace(self, half_length=half_length, observe_x=observe_x)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_space


@dataclass
class CoupledIncrementSample:
    real_increment: float
    surrogate: float
    delta: float
    t_delta: float
    t: float

    @property
    def squared_gap(self) -> float:
        return (self.real_increment - self.surrogate) ** 2


@dataclass
class SolverOutput:
    path: Path
    fine_times: np.ndarray
    fine_values: np.ndarray
    snapshots: List[Tuple[float, np.ndarray]] = field(default_factory=list)
    diagnostics: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class HolderReport:
    exponent: float
    slope: float
    intercept: float
    lags: Tuple[float, ...]
    mean_squares: Tuple[float, ...]
    theory: float


class SpectralSolver:
    """
    One-step propagator on the periodic grid.

    Each step maps u_hat to decay * u_hat + weight * rfft(forcing), where the
    forcing is sigma(u) dW / dx with dW cell increments of variance dt dx.
    """

    def __init__(self, alpha: float, theta: float, n_space: int, half_length: float, observe_x: float,
                 dt: float, scheme: str = "exact_variance"):
        self.alpha = alpha
        self.theta = theta
        self.n_space = n_space
        self.half_length = half_length
        self.dt = dt
        self.dx = 2.0 * half_length / n_space
        self.xi = 2.0 * np.pi * np.fft.rfftfreq(n_space, d=self.dx)
        self.rate = theta * self.xi ** alpha
        self.decay = np.exp(-self.rate * dt)
        if scheme == "exact_variance":
            scaled = 2.0 * self.rate * dt
            weight = np.ones_like(scaled)
            positive = scaled > 0
            weight[positive] = np.sqrt(-np.expm1(-scaled[positive]) / scaled[positive])
            self.weight = weight
        else:
            self.weight = self.decay.copy()
        multiplicity = np.full(self.xi.size, 2.0)
        multiplicity[0] = 1.0
        if n_space % 2 == 0:
            multiplicity[-1] = 1.0
        self._observe = multiplicity * np.exp(1j * self.xi * observe_x) / n_space
        logger.debug(
            f"SpectralSolver alpha={alpha} theta={theta} n={n_space} L={half_length:.4g} "
            f"dx={self.dx:.3e} dt={dt:.3e} xi_max={self.xi[-1]:.4g} scheme={scheme}"
        )

    @property
    def nyquist(self) -> float:
        return float(self.xi[-1])

    def zero_state(self) -> np.ndarray:
        return np.zeros(self.xi.size, dtype=complex)

    def noise_cells(self, gen: np.random.Generator, steps: int) -> np.ndarray:
        """Cell increments dW, shape (steps, n_space), variance dt * dx each."""
        return gen.standard_normal((steps, self.n_space)) * math.sqrt(self.dt * self.dx)

    def step(self, u_hat: np.ndarray, forcing: np.ndarray) -> np.ndarray:
        return self.decay * u_hat + self.weight * np.fft.rfft(forcing)

    def physical(self, u_hat: np.ndarray) -> np.ndarray:
        return np.fft.irfft(u_hat, n=self.n_space)

    def observe(self, u_hat: np.ndarray) -> float:
        return float(np.real(self._observe @ u_hat))

    def forcing(self, sigma: SigmaSpec, u_hat: np.ndarray, cells: np.ndarray) -> np.ndarray:
        if sigma.is_constant:
            return sigma.params[0] * cells / self.dx
        return sigma(self.physical(u_hat)) * cells / self.dx


# --- sub-grid closure ---

def _upper_gamma_negative(s: float, x: np.ndarray) -> np.ndarray:
    """Gamma(s, x) for s in (-1, 0) and x > 0 via Gamma(s, x) = (Gamma(s+1, x) - x^s e^{-x}) / s."""
    return (gammaincc(s + 1.0, x) * gamma(s + 1.0) - x ** s * np.exp(-x)) / s


@lru_cache(maxsize=16)
def subgrid_autocovariance(alpha: float, theta: float, nyquist: float, spacing: float, n_lags: int) -> np.ndarray:
    """
    c(k) = (1/pi) int_{xi_max}^inf exp(-theta k h xi^alpha) / (2 theta xi^alpha) dxi,  k = 0..n_lags-1.

    Stationary covariance at a point of the frequencies the grid cannot carry.
    """
    a = theta * spacing * np.arange(n_lags)
    values = np.empty(n_lags)
    values[0] = nyquist ** (1.0 - alpha) / (alpha - 1.0)
    if n_lags > 1:
        lagged = a[1:]
        values[1:] = lagged ** (1.0 - 1.0 / alpha) / alpha * _upper_gamma_negative(1.0 / alpha - 1.0, lagged * nyquist ** alpha)
    values = values / (2.0 * math.pi * theta)
    values.setflags(write=False)
    return values


# --- solvers ---

def _observation_steps(config: SimConfig, spacing: float) -> Tuple[int, float]:
    """Fine steps per observation interval and the fine step, with nodes on every t_i."""
    if config.n_time is not None:
        dt = config.t_horizon / config.n_time
        ratio = spacing / dt
        steps = int(round(ratio))
        if steps < 1 or abs(ratio - steps) > 1e-9 * ratio:
            raise InvalidArgumentError(
                f"n_time={config.n_time} does not place fine nodes on the observation grid (ratio {ratio:.6g})"
            )
        return steps, spacing / steps
    balance = config.dx ** config.alpha
    steps = max(config.steps_per_observation, int(math.ceil(spacing / balance)))
    return steps, spacing / steps


def _integrate(config: SimConfig, theta: float, sigma: SigmaSpec, clock: float, replicate: int) -> SolverOutput:
    """Runs the solver over engine time [0, clock] and observes on clock * i / N."""
    n_obs = config.grid_n
    spacing = clock / n_obs
    steps, dt = _observation_steps(config, spacing)
    solver = SpectralSolver(config.alpha, theta, config.n_space, config.half_length, config.observe_x, dt, config.scheme)
    gen = stream(config.seed, replicate, PRIMARY_NOISE)

    u_hat = solver.zero_state()
    observed = np.zeros(n_obs + 1)
    fine = np.zeros(n_obs * steps + 1)
    snapshots: List[Tuple[float, np.ndarray]] = []
    for i in range(n_obs):
        cells = solver.noise_cells(gen, steps)
        if sigma.is_constant:
            kicks = solver.weight * np.fft.rfft(sigma.params[0] * cells / solver.dx, axis=1)
            for j in range(steps):
                u_hat = solver.decay * u_hat + kicks[j]
                fine[i * steps + j + 1] = solver.observe(u_hat)
        else:
            for j in range(steps):
                u_hat = solver.step(u_hat, solver.forcing(sigma, u_hat, cells[j]))
                fine[i * steps + j + 1] = solver.observe(u_hat)
        if not np.all(np.isfinite(u_hat)):
            raise NumericalFailureError("solver field became non-finite",
                                        {"step": (i + 1) * steps, "observation": i + 1, "replicate": replicate})
        observed[i + 1] = fine[(i + 1) * steps]
        if config.snapshot_every and (i + 1) % config.snapshot_every == 0:
            snapshots.append(((i + 1) * spacing, solver.physical(u_hat)))

    if config.subgrid_closure:
        autocov = subgrid_autocovariance(config.alpha, theta, solver.nyquist, spacing, n_obs)
        closure = sample_stationary_gaussian(autocov, stream(config.seed, replicate, SUBGRID_CLOSURE))
        observed[1:] = observed[1:] + sigma(observed[1:]) * closure

    diagnostics = {"dt": dt, "dx": solver.dx, "steps_per_observation": steps,
                   "total_steps": n_obs * steps, "xi_max": solver.nyquist, "engine_theta": theta, "clock": clock}
    fine_times = np.arange(fine.size) * dt
    return SolverOutput(path=Path(values=observed, grid_n=n_obs, spatial_point=config.observe_x, meta="spde-numeric"),
                        fine_times=fine_times, fine_values=fine, snapshots=snapshots, diagnostics=diagnostics)


def simulate(config: SimConfig, replicate: int = 0) -> SolverOutput:
    """Direct simulation with the configured theta; observation times i/N."""
    config = config.validate()
    output = _integrate(config, config.theta, config.sigma, 1.0, replicate)
    output.path.attributes.update({"alpha": config.alpha, "theta": config.theta, "seed": config.seed,
                                   "replicate": replicate, "sigma": config.sigma.to_dict()})
    return output


def solve_nonlinear(config: SimConfig, replicate: int = 0) -> Path:
    """
    Observed path u(t_i, observe_x), t_i = i/N, of the mild solution.

    Raises:
        InvalidArgumentError: config invariants violated.
        NumericalFailureError: the field became non-finite (step index reported).
    """
    return simulate(config, replicate).path


def simulate_parametrized(config: SimConfig, replicate: int = 0) -> SolverOutput:
    """
    u_theta through the clock change v(t) = u_theta(t / theta): v solves the
    equation with theta = 1 and sigma / sqrt(theta), and u_theta(t_i) = v(theta t_i).
    """
    if not config.theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {config.theta}")
    config = config.validate()
    if config.t_horizon < config.theta:
        raise InvalidArgumentError(f"t_horizon={config.t_horizon} must be >= theta={config.theta}")
    theta = config.theta
    output = _integrate(config, 1.0, config.sigma.scaled(theta ** -0.5), theta, replicate)
    output.fine_times = output.fine_times / theta
    output.diagnostics["clock_scale"] = theta
    output.path.attributes.update({"alpha": config.alpha, "theta": theta, "seed": config.seed,
                                   "replicate": replicate, "sigma": config.sigma.to_dict()})
    return output


def solve_parametrized(config: SimConfig, replicate: int = 0) -> Path:
    return simulate_parametrized(config, replicate).path


def check_coupling_window(config: SimConfig, t: float, delta: float) -> float:
    """Returns beta = 2 alpha / (2 alpha + 1) once delta > 0, delta^beta < t and t + delta <= t_horizon."""
    if not delta > 0:
        raise InvalidArgumentError(f"delta must be positive, got {delta}")
    beta = 2.0 * config.alpha / (2.0 * config.alpha + 1.0)
    if not delta ** beta < t:
        raise InvalidArgumentError(f"need delta^beta < t, got delta^beta={delta ** beta:.6g}, t={t}")
    if t + delta > config.t_horizon * (1.0 + 1e-12):
        raise InvalidArgumentError(f"t + delta = {t + delta} exceeds t_horizon={config.t_horizon}")
    return beta


def coupled_increment(config: SimConfig, t: float, delta: float, seed: Optional[int] = None, replicate: int = 0,
                      independent_copy: bool = True) -> CoupledIncrementSample:
    """
    Real increment u(t+delta) - u(t) and the surrogate sigma(u(t(delta))) * increment
    of a linear solution driven by an independent noise copy on [0, t(delta)]
    and by the primary noise afterwards, with t(delta) = t - delta^beta,
    beta = 2 alpha / (2 alpha + 1).

    Args:
        config: Solver configuration (theta, sigma, grid); subgrid closure is not used.
        t: Base time.
        delta: Increment length.
        seed: Overrides config.seed.
        replicate: Replicate index.
        independent_copy: False drives the linear solution with the primary
            noise throughout.
    """
    config = config.validate()
    seed = config.seed if seed is None else seed
    beta = check_coupling_window(config, t, delta)
    alpha = config.alpha

    steps_per_delta = int(math.ceil(delta / min(config.dx ** alpha, delta / MIN_STEPS_PER_DELTA)))
    dt = delta / steps_per_delta
    k_t = int(round(t / dt))
    if abs(k_t * dt - t) > 1e-9 * t:
        logger.warning(f"t={t} is not on the fine grid of step {dt:.3e}; using t={k_t * dt:.10g}")
    t_delta = t - delta ** beta
    k_delta = int(round(t_delta / dt))
    k_end = k_t + steps_per_delta

    solver = SpectralSolver(alpha, config.theta, config.n_space, config.half_length, config.observe_x, dt, config.scheme)
    unit = SigmaSpec.constant(1.0)
    primary = stream(seed, replicate, PRIMARY_NOISE)
    copy = stream(seed, replicate, INDEPENDENT_COPY)

    u_hat = solver.zero_state()
    lin_hat = solver.zero_state()
    u_at = {0: 0.0}
    lin_at = {0: 0.0}
    k = 0
    while k < k_end:
        block = min(NOISE_BLOCK, k_end - k)
        cells = solver.noise_cells(primary, block)
        n_copy = max(0, min(block, k_delta - k)) if independent_copy else 0
        copy_cells = solver.noise_cells(copy, n_copy) if n_copy else None
        for j in range(block):
            u_hat = solver.step(u_hat, solver.forcing(config.sigma, u_hat, cells[j]))
            driver = copy_cells[j] if copy_cells is not None and j < n_copy else cells[j]
            lin_hat = solver.step(lin_hat, solver.forcing(unit, lin_hat, driver))
            k += 1
            if k in (k_delta, k_t, k_end):
                u_at[k] = solver.observe(u_hat)
                lin_at[k] = solver.observe(lin_hat)
        if not (np.all(np.isfinite(u_hat)) and np.all(np.isfinite(lin_hat))):
            raise NumericalFailureError("coupled solver became non-finite", {"step": k, "replicate": replicate})

    real = u_at[k_end] - u_at[k_t]
    surrogate = float(config.sigma(u_at[k_delta])) * (lin_at[k_end] - lin_at[k_t])
    return CoupledIncrementSample(real_increment=real, surrogate=surrogate, delta=delta,
                                  t_delta=k_delta * dt, t=k_t * dt)


def holder_diagnostics(paths: Union[Path, Sequence[Path]], alpha: float) -> HolderReport:
    """
    Temporal Holder exponent from the log-log slope of the mean squared
    increment against the lag (dyadic lags 1..N/16), averaged over time and
    over the supplied replicates.

    Raises:
        InvalidArgumentError: N < 256 or mismatched grids.
        NumericalFailureError: all increments vanish.
    """
    batch = [paths] if isinstance(paths, Path) else list(paths)
    if not batch:
        raise InvalidArgumentError("holder_diagnostics needs at least one path")
    grid_n = batch[0].grid_n
    if grid_n < 256:
        raise InvalidArgumentError(f"holder_diagnostics needs N >= 256, got {grid_n}")
    if any(p.grid_n != grid_n or p.t_end - p.t_start != batch[0].t_end - batch[0].t_start for p in batch):
        raise InvalidArgumentError("all paths must share the same grid")
    spacing = (batch[0].t_end - batch[0].t_start) / grid_n
    values = np.stack([p.values for p in batch])

    lags = []
    mean_squares = []
    lag = 1
    while lag <= grid_n // 16:
        diffs = values[:, lag:] - values[:, :-lag]
        lags.append(lag * spacing)
        mean_squares.append(float(np.mean(diffs ** 2)))
        lag *= 2
    mean_squares_arr = np.asarray(mean_squares)
    if not np.all(mean_squares_arr > 0):
        raise NumericalFailureError("path increments vanish, no Holder exponent", {"mean_squares": mean_squares})
    fit = stats.linregress(np.log(lags), np.log(mean_squares_arr))
    report = HolderReport(exponent=fit.slope / 2.0, slope=fit.slope, intercept=fit.intercept,
                          lags=tuple(lags), mean_squares=tuple(mean_squares),
                          theory=(alpha - 1.0) / (2.0 * alpha))
    logger.info(f"Holder exponent {report.exponent:.4f} (theory {report.theory:.4f}) over {len(batch)} path(s)")
    return report
