"""
Aggregation of replicate errors into rate reports: per-N error summaries,
least-squares slope on (log N, log error), bootstrap slope interval and a
verdict against the theoretical exponent.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .. import config
from ..errors import InvalidArgumentError
from ..random_streams import BOOTSTRAP_REPLICATE, stream

logger = logging.getLogger(__name__)

VERDICTS = ("consistent", "faster than bound", "slower than bound", "no decay", "not fitted")
AGGREGATES = ("mean", "median")


@dataclass(frozen=True)
class RateSpec:
    name: str
    theoretical_exponent: Optional[float]
    source: str = ""

    def __post_init__(self):
        if self.theoretical_exponent is not None and not self.theoretical_exponent < 0:
            raise InvalidArgumentError(f"theoretical exponent of '{self.name}' must be negative, got {self.theoretical_exponent}")


@dataclass
class McReport:
    name: str
    n_values: Tuple[int, ...]
    errors: Tuple[float, ...]
    standard_errors: Tuple[float, ...]
    fitted_slope: float
    slope_ci: Tuple[float, float]
    replicates: int
    seed: int
    theoretical_exponent: Optional[float] = None
    verdict: str = "consistent"
    monotone: bool = True
    aggregate: str = "mean"
    error_kind: str = "l1"
    notes: Dict[str, Any] = field(default_factory=dict)

    def rows(self):
        """(n, error, se, replicates) per N."""
        return [(n, e, s, self.replicates) for n, e, s in zip(self.n_values, self.errors, self.standard_errors)]

    def summary(self) -> Dict[str, Any]:
        return {"name": self.name, "slope": self.fitted_slope, "ci": list(self.slope_ci),
                "theory": self.theoretical_exponent, "verdict": self.verdict, "monotone": self.monotone,
                "replicates": self.replicates, "seed": self.seed, "aggregate": self.aggregate,
                "error_kind": self.error_kind, "notes": self.notes}

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["n_values"] = list(self.n_values)
        data["errors"] = list(self.errors)
        data["standard_errors"] = list(self.standard_errors)
        data["slope_ci"] = list(self.slope_ci)
        return data


def aggregate_errors(samples: np.ndarray, aggregate: str = "mean") -> Tuple[np.ndarray, np.ndarray]:
    """Column-wise summary and standard error of a (replicates, n_values) error matrix."""
    if aggregate not in AGGREGATES:
        raise InvalidArgumentError(f"aggregate must be one of {AGGREGATES}, got '{aggregate}'")
    samples = np.asarray(samples, dtype=float)
    count = samples.shape[0]
    spread = samples.std(axis=0, ddof=1) / np.sqrt(count) if count > 1 else np.zeros(samples.shape[1])
    if aggregate == "mean":
        return samples.mean(axis=0), spread
    # asymptotic standard error of the median under normality
    return np.median(samples, axis=0), np.sqrt(np.pi / 2.0) * spread


def fit_slope(n_values: Sequence[int], errors: Sequence[float]) -> Tuple[float, float]:
    """(slope, intercept) of log error against log N."""
    errors = np.asarray(errors, dtype=float)
    if not np.all(errors > 0):
        raise InvalidArgumentError(f"errors must be positive for a log-log fit, got {errors}")
    fit = stats.linregress(np.log(np.asarray(n_values, dtype=float)), np.log(errors))
    return float(fit.slope), float(fit.intercept)


def bootstrap_slope_ci(n_values: Sequence[int], samples: np.ndarray, seed: int, aggregate: str = "mean",
                       resamples: int = config.BOOTSTRAP_RESAMPLES, level: float = 0.95) -> Tuple[float, float]:
    """
    Percentile interval of the fitted slope over bootstrap resamples of the
    replicates (whole rows, since one replicate serves every N).
    """
    samples = np.asarray(samples, dtype=float)
    gen = stream(seed, BOOTSTRAP_REPLICATE, 0)
    count = samples.shape[0]
    slopes = []
    for _ in range(resamples):
        picked = samples[gen.integers(0, count, size=count)]
        summary, _ = aggregate_errors(picked, aggregate)
        if np.all(summary > 0):
            slopes.append(fit_slope(n_values, summary)[0])
    if not slopes:
        return float("nan"), float("nan")
    tail = 100.0 * (1.0 - level) / 2.0
    low, high = np.percentile(slopes, [tail, 100.0 - tail])
    return float(low), float(high)


def classify_slope(slope: float, theory: Optional[float], tolerance: float = config.SLOPE_TOLERANCE) -> str:
    if not slope < 0:
        return "no decay"
    if theory is None:
        return "consistent"
    if slope < theory - tolerance:
        return "faster than bound"
    if slope > theory + tolerance:
        return "slower than bound"
    return "consistent"


def monotone_decrease(errors: Sequence[float], standard_errors: Sequence[float]) -> bool:
    """
    Decreasing after dropping the smallest N, allowing one inversion no larger
    than one standard error.
    """
    errors = list(errors)[1:]
    ses = list(standard_errors)[1:]
    allowed = 1
    for k in range(len(errors) - 1):
        rise = errors[k + 1] - errors[k]
        if rise <= 0:
            continue
        if rise <= max(ses[k], ses[k + 1]) and allowed:
            allowed -= 1
            continue
        return False
    return True


def build_report(spec: RateSpec, n_values: Sequence[int], samples: np.ndarray, seed: int,
                 aggregate: str = "mean", error_kind: str = "l1",
                 notes: Optional[Dict[str, Any]] = None) -> McReport:
    """
    Args:
        spec: Name and theoretical exponent.
        n_values: Grid sizes (columns of samples).
        samples: Error of every replicate at every N, shape (replicates, len(n_values)).
        seed: Base seed (also keys the bootstrap stream).
        aggregate: 'mean' for L1/L2 errors, 'median' for estimator errors.
        error_kind: Label of the error ('l1', 'l2', 'median_abs', 'median_rel').
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != len(n_values):
        raise InvalidArgumentError(f"samples shape {samples.shape} does not match {len(n_values)} grid sizes")
    errors, ses = aggregate_errors(samples, aggregate)
    if len(n_values) < 2:
        slope, ci, verdict = float("nan"), (float("nan"), float("nan")), "not fitted"
    else:
        slope, _ = fit_slope(n_values, errors)
        ci = bootstrap_slope_ci(n_values, samples, seed, aggregate)
        verdict = classify_slope(slope, spec.theoretical_exponent)
    monotone = monotone_decrease(errors, ses)
    report = McReport(name=spec.name, n_values=tuple(int(n) for n in n_values),
                      errors=tuple(float(e) for e in errors), standard_errors=tuple(float(s) for s in ses),
                      fitted_slope=slope, slope_ci=ci, replicates=samples.shape[0], seed=seed,
                      theoretical_exponent=spec.theoretical_exponent, verdict=verdict, monotone=monotone,
                      aggregate=aggregate, error_kind=error_kind,
                      notes={"source": spec.source, "smallest_n": int(min(n_values)), **(notes or {})})
    message = (f"{spec.name}: slope {slope:.3f} [{ci[0]:.3f}, {ci[1]:.3f}] theory {spec.theoretical_exponent} "
               f"-> {verdict}, monotone={monotone}")
    if verdict == "faster than bound":
        logger.warning(f"⚠️ {message}")
    else:
        logger.info(f"✅ {message}" if verdict in ("consistent", "not fitted") else f"❌ {message}")
    return report


def compare_slopes(first: McReport, second: McReport,
                   tolerance: float = config.SLOPE_AGREEMENT_TOLERANCE) -> Tuple[float, bool]:
    """(|slope gap|, agree) of two fitted rates; unfitted slopes never agree."""
    if not tolerance > 0:
        raise InvalidArgumentError(f"tolerance must be positive, got {tolerance}")
    gap = abs(first.fitted_slope - second.fitted_slope)
    agree = bool(np.isfinite(gap) and gap <= tolerance)
    message = f"{first.name} vs {second.name}: slope gap {gap:.3f} (tolerance {tolerance})"
    if agree:
        logger.info(f"✅ {message}")
    else:
        logger.warning(f"⚠️ {message}")
    return float(gap), agree
