"""
Run configuration: module defaults, environment overrides (.env supported)
and YAML run files.

Precedence for every setting: command-line flag > YAML file > environment > default.
"""
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Mapping, Optional

import yaml
from dotenv import load_dotenv

from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

load_dotenv()

# --- Defaults ---
DEFAULT_SEED = 7
DEFAULT_OUTPUT_DIR = "runs"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_U0_MAX_N = 16384
DEFAULT_REPLICATES = 200
DEFAULT_N_GRID = (256, 1024, 4096, 16384)
DEFAULT_DELTA_LADDER = tuple(2.0 ** -k for k in range(6, 11))
RIEMANN_FLOOR = 1e-12
BOOTSTRAP_RESAMPLES = 200
SLOPE_TOLERANCE = 0.2
# |slope(V) - slope(U)| allowed between the nonlinear V and U rates
SLOPE_AGREEMENT_TOLERANCE = 0.1

ENV_THREADS = "VARHEAT_THREADS"
ENV_U0_MAX_N = "VARHEAT_U0_MAX_N"
ENV_OUTPUT_DIR = "VARHEAT_OUTPUT_DIR"
ENV_LOG_LEVEL = "VARHEAT_LOG_LEVEL"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgumentError(f"environment variable {name} must be an integer, got '{raw}'")
    if value < 1:
        raise InvalidArgumentError(f"environment variable {name} must be >= 1, got {value}")
    return value


def worker_count() -> int:
    """Thread cap for replicate pools (VARHEAT_THREADS, default: CPU count)."""
    return _env_int(ENV_THREADS, os.cpu_count() or 1)


def u0_factorization_cap() -> int:
    return _env_int(ENV_U0_MAX_N, DEFAULT_U0_MAX_N)


@dataclass
class RunSettings:
    """Global settings of one CLI run plus the subcommand parameter tree."""
    seed: int = DEFAULT_SEED
    output_dir: str = DEFAULT_OUTPUT_DIR
    output_format: str = "csv"
    log_level: str = DEFAULT_LOG_LEVEL
    threads: int = 1
    u0_max_n: int = DEFAULT_U0_MAX_N
    params: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def read_config_file(path: str) -> Dict[str, Any]:
    """Loads a YAML mapping; a missing or malformed file is an invalid argument."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = yaml.safe_load(handle) or {}
    except FileNotFoundError:
        raise InvalidArgumentError(f"config file not found: {path}")
    except yaml.YAMLError as e:
        raise InvalidArgumentError(f"config file {path} is not valid YAML: {e}")
    if not isinstance(data, dict):
        raise InvalidArgumentError(f"config file {path} must contain a mapping, got {type(data).__name__}")
    logger.debug(f"Loaded config file {path}: {sorted(data)}")
    return data


def load_run_config(flags: Mapping[str, Any], config_path: Optional[str] = None) -> RunSettings:
    """
    Merges defaults, environment, YAML file and explicit flags.

    Args:
        flags: Parsed command-line values; None means "not given".
        config_path: Optional YAML file. Top-level keys matching RunSettings
            fields set globals; everything else lands in `params`.

    Returns:
        RunSettings with the effective configuration.
    """
    settings = RunSettings(
        output_dir=os.getenv(ENV_OUTPUT_DIR, DEFAULT_OUTPUT_DIR),
        log_level=os.getenv(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL),
        threads=worker_count(),
        u0_max_n=u0_factorization_cap(),
    )
    layers = []
    if config_path:
        layers.append(read_config_file(config_path))
    layers.append({k: v for k, v in flags.items() if v is not None})

    global_keys = set(RunSettings.__dataclass_fields__) - {"params"}
    for layer in layers:
        for key, value in layer.items():
            if key in global_keys:
                setattr(settings, key, value)
            elif key == "params" and isinstance(value, dict):
                settings.params.update(value)
            else:
                settings.params[key] = value

    if settings.output_format not in ("csv", "json"):
        raise InvalidArgumentError(f"format must be csv or json, got '{settings.output_format}'")
    if int(settings.seed) < 0:
        raise InvalidArgumentError(f"seed must be non-negative, got {settings.seed}")
    settings.seed = int(settings.seed)
    settings.threads = max(1, int(settings.threads))
    # Downstream samplers read the cap from the environment.
    os.environ[ENV_U0_MAX_N] = str(int(settings.u0_max_n))
    logger.debug(f"Effective run config: {settings.to_dict()}")
    return settings
