import argparse
import logging
import os
import sys
import time
from dataclasses import asdict
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional

from dotenv import load_dotenv

# --- Load .env file early! ---
load_dotenv()
# ---------------------------

from . import __version__, config  # noqa: E402
from .errors import InvalidArgumentError, NumericalFailureError, VarheatError  # noqa: E402

logger = logging.getLogger(__name__)

# --- Shared Logging Configuration ---
LOG_FILENAME = 'last_run.log'
LOG_FORMAT = "%(asctime)s [%(levelname)-7s] %(name)s: %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"
# ---------------------------------

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

PROCESSES = ("fbm", "perturbed", "u0", "spde")
PAIR_TARGET = "nonlinear_pair"
RERUN_SUFFIX = "-rerun"

# Defaults for parameters that may also come from a YAML file or a manifest.
PARAM_DEFAULTS: Dict[str, Any] = {
    "alpha": 2.0,
    "theta": 1.0,
    "hurst": 0.25,
    "sigma": "constant:1",
    "n": 1024,
    "n_space": 1024,
    "c0": 1.0,
    "cy": 1.0,
    "t": 1.0,
    "t_start": 0.0,
    "t_end": 1.0,
    "replicate": 0,
    "transform": False,
    "snapshot_every": None,
    "abs_tol": 1e-10,
    "reps": config.DEFAULT_REPLICATES,
    "n_grid": ",".join(str(n) for n in config.DEFAULT_N_GRID),
    "delta_ladder": ",".join(repr(d) for d in config.DEFAULT_DELTA_LADDER),
    "allow_small": False,
}


def setup_logging(log_level_str: str = "INFO", log_dir: Optional[str] = None):
    """Configures console logging at the given level and a DEBUG file log in log_dir."""
    log_level = getattr(logging, log_level_str.upper(), logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        handler.close()

    # --- Console Handler ---
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    # --- File Handler ---
    if log_dir is None:
        return
    log_path = os.path.join(log_dir, LOG_FILENAME)
    try:
        file_handler = logging.FileHandler(log_path, mode='a', encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
        logger.debug(f"Logging configured. Level: {log_level_str}. Outputting to console and file: {log_path}")
    except OSError as e:
        logger.error(f"Failed to configure file logging to {log_path}: {e}")


def global_exception_handler(exc_type, exc_value, exc_traceback):
    logger.error("Uncaught exception", exc_info=(exc_type, exc_value, exc_traceback))


sys.excepthook = global_exception_handler


# --- Parameter helpers ---

def _int_list(text) -> List[int]:
    if isinstance(text, (list, tuple)):
        return [int(v) for v in text]
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"expected a comma-separated list of integers, got '{text}'")


def _float_list(text) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"expected a comma-separated list of numbers, got '{text}'")


def _sigma(params: Dict[str, Any]):
    from .spde_sim import SigmaSpec
    value = params["sigma"]
    if isinstance(value, dict):
        return SigmaSpec.from_dict(value)
    return SigmaSpec.parse(str(value))


def _sim_config(params: Dict[str, Any], seed: int):
    from .spde_sim import SimConfig
    theta = float(params["theta"])
    return SimConfig(alpha=float(params["alpha"]), theta=theta, sigma=_sigma(params), grid_n=int(params["n"]),
                     n_space=int(params["n_space"]), seed=seed, t_horizon=max(1.0, theta),
                     snapshot_every=params.get("snapshot_every"))


def _build_path(params: Dict[str, Any], seed: int, run_dir: Optional[str] = None, outputs: Optional[List[str]] = None):
    """Draws one path of the requested process (replicate params['replicate'])."""
    from .gaussian import PerturbedFbmSpec, sample_fbm, sample_linear_theta_path, sample_perturbed_fbm, sample_u0_path
    from .kernel import KernelParams
    from .serialization import write_snapshots
    from .spde_sim import simulate, simulate_parametrized

    process = params.get("process")
    if process not in PROCESSES:
        raise InvalidArgumentError(f"process must be one of {PROCESSES}, got '{process}'")
    n = int(params["n"])
    replicate = int(params["replicate"])
    if process == "fbm":
        return sample_fbm(float(params["hurst"]), n, seed, replicate, t_end=float(params["t_end"]))
    if process == "perturbed":
        spec = PerturbedFbmSpec(float(params["c0"]), float(params["hurst"]), float(params["cy"]))
        return sample_perturbed_fbm(spec, n, seed, replicate)
    kernel = KernelParams(float(params["alpha"]))
    theta = float(params["theta"])
    if process == "u0":
        if theta != 1.0:
            return sample_linear_theta_path(kernel, n, theta, seed, replicate)
        return sample_u0_path(kernel, n, seed, replicate, float(params["t_start"]), float(params["t_end"]))
    sim = _sim_config(params, seed)
    output = simulate_parametrized(sim, replicate) if params.get("transform") else simulate(sim, replicate)
    if run_dir is not None and output.snapshots and outputs is not None:
        meta = {"dx": output.diagnostics["dx"], "dt": output.diagnostics["dt"], "alpha": sim.alpha,
                "theta": sim.theta, "seed": seed}
        outputs.extend(write_snapshots(run_dir, output.snapshots, meta))
    return output.path


# --- Subcommands ---

def cmd_kernel_check(params: Dict[str, Any], settings, run_dir: str) -> List[str]:
    from .kernel import KernelParams, kernel_l2_time_integral, kernel_property_check
    from .serialization import write_json

    kernel = KernelParams(float(params["alpha"]), abs_tol=float(params["abs_tol"]))
    t = float(params["t"])
    report = kernel_property_check(kernel, t)
    data = asdict(report)
    data["l2_time_integral_0_t"] = kernel_l2_time_integral(kernel, 0.0, t)
    return [write_json(os.path.join(run_dir, "kernel_check.json"), data)]


def cmd_sample(params: Dict[str, Any], settings, run_dir: str) -> List[str]:
    from .serialization import write_json, write_path_csv

    outputs: List[str] = []
    path = _build_path(params, settings.seed, run_dir, outputs)
    if settings.output_format == "json":
        outputs.append(write_json(os.path.join(run_dir, "path.json"),
                                  {"meta": path.meta, "grid_n": path.grid_n, "t_start": path.t_start,
                                   "t_end": path.t_end, "values": path.values, "attributes": path.attributes}))
    outputs.append(write_path_csv(os.path.join(run_dir, "path.csv"), path))
    logger.info(f"✅ Sampled {path.meta} path with N={path.grid_n}")
    return outputs


def _variation(kind: str, path, params: Dict[str, Any]):
    from .gaussian import power_order
    from .variations import fbm_normalized_variation, power_variation, quad_variation_renorm

    alpha = float(params["alpha"])
    if kind == "quad":
        return quad_variation_renorm(path, alpha), alpha
    if kind == "fbm":
        hurst = float(params["hurst"])
        return fbm_normalized_variation(path, hurst), hurst
    if kind == "power":
        p = float(params["p"]) if params.get("p") is not None else power_order(alpha)
        return power_variation(path, p), alpha
    raise InvalidArgumentError(f"variation kind must be quad, power or fbm, got '{kind}'")


def cmd_variation(params: Dict[str, Any], settings, run_dir: str) -> List[str]:
    from .serialization import read_path_csv, write_json, write_variation_rows

    if params.get("input"):
        path = read_path_csv(params["input"])
    elif params.get("simulate") or params.get("process"):
        path = _build_path(dict(params, process=params.get("process") or "u0"), settings.seed)
    else:
        raise InvalidArgumentError("variation needs --input FILE or --simulate")
    result, alpha_or_h = _variation(params["kind"], path, params)
    logger.info(f"✅ {result.kind} N={result.grid_n}: {result.statistic!r}")
    if settings.output_format == "json":
        data = dict(asdict(result), alpha_or_h=alpha_or_h)
        return [write_json(os.path.join(run_dir, "variation.json"), data)]
    row = (result.kind, result.grid_n, alpha_or_h, result.p, result.statistic)
    return [write_variation_rows(os.path.join(run_dir, "variation.csv"), [row])]


def cmd_estimate(params: Dict[str, Any], settings, run_dir: str) -> List[str]:
    from .estimators import estimate_alpha, estimate_alpha_corrected, estimate_theta_power, estimate_theta_quadratic
    from .gaussian import b0_alpha, c0_alpha
    from .kernel import KernelParams
    from .serialization import read_path_csv, write_json
    from .spde_sim import SigmaSpec

    if params.get("input"):
        path = read_path_csv(params["input"])
    else:
        params = dict(params, process=params.get("process") or "u0")
        path = _build_path(params, settings.seed)
    sigma = SigmaSpec.constant(1.0) if path.meta == "u0-exact" else _sigma(params)
    alpha = float(params["alpha"])
    target = params["target"]
    if target == "alpha":
        result = estimate_alpha(path, sigma, theta=float(params["theta"]))
    elif target == "alpha_corrected":
        result = estimate_alpha_corrected(path, sigma, float(params["theta"]))
    elif target == "theta1":
        result = estimate_theta_quadratic(path, alpha, sigma, c0_alpha(KernelParams(alpha)))
    elif target == "theta2":
        result = estimate_theta_power(path, alpha, sigma, b0_alpha(KernelParams(alpha)))
    else:
        raise InvalidArgumentError(f"unknown estimate target '{target}'")
    logger.info(f"✅ {result.target} ({result.method}) N={result.grid_n}: {result.estimate:.6f}")
    return [write_json(os.path.join(run_dir, "estimate.json"), result.to_json_dict())]


def cmd_rate(params: Dict[str, Any], settings, run_dir: str) -> List[str]:
    from .experiments import (
        ESTIMATOR_TARGETS, RATE_TARGETS, ExperimentParams, run_estimator_experiment, run_rate_experiment,
        run_variation_pair,
    )
    from .serialization import write_json, write_report

    target = params["target"]
    exp = ExperimentParams(alpha=float(params["alpha"]), theta=float(params["theta"]), sigma=_sigma(params),
                           hurst=float(params["hurst"]), c0=float(params["c0"]),
                           perturbation_scale=float(params["cy"]),
                           n_space=int(params["n_space"]), process=params.get("process") or "u0")
    grid = _int_list(params["n_grid"])
    strict = not params.get("allow_small")
    if target in RATE_TARGETS:
        report = run_rate_experiment(target, exp, grid, int(params["reps"]), settings.seed,
                                     max_workers=settings.threads, strict=strict)
    elif target in ESTIMATOR_TARGETS:
        report = run_estimator_experiment(target, exp, grid, int(params["reps"]), settings.seed,
                                          max_workers=settings.threads, strict=strict)
    elif target == PAIR_TARGET:
        pair = run_variation_pair(exp, grid, int(params["reps"]), settings.seed, max_workers=settings.threads,
                                  strict=strict)
        outputs = write_report(run_dir, "rate_nonlinear_vn", pair.v_report)
        outputs += write_report(run_dir, "rate_nonlinear_un", pair.u_report)
        outputs.append(write_json(os.path.join(run_dir, "slope_agreement.json"), pair.to_dict()))
        return outputs
    else:
        raise InvalidArgumentError(f"rate target must be one of {RATE_TARGETS + ESTIMATOR_TARGETS + (PAIR_TARGET,)}, "
                                   f"got '{target}'")
    return write_report(run_dir, f"rate_{target}", report)


def cmd_prop4_check(params: Dict[str, Any], settings, run_dir: str) -> List[str]:
    from .experiments import run_coupling_experiment
    from .serialization import write_json
    from .spde_sim import SimConfig

    sim = SimConfig(alpha=float(params["alpha"]), theta=float(params["theta"]), sigma=_sigma(params),
                    n_space=int(params["n_space"]), seed=settings.seed, subgrid_closure=False)
    report = run_coupling_experiment(sim, float(params["t"]), _float_list(params["delta_ladder"]),
                                     int(params["reps"]), settings.seed, max_workers=settings.threads,
                                     strict=not params.get("allow_small"))
    return [write_json(os.path.join(run_dir, "prop4_check.json"), report.to_dict())]


COMMANDS: Dict[str, Callable[[Dict[str, Any], Any, str], List[str]]] = {
    "kernel-check": cmd_kernel_check,
    "sample": cmd_sample,
    "variation": cmd_variation,
    "estimate": cmd_estimate,
    "rate": cmd_rate,
    "prop4-check": cmd_prop4_check,
}

# Per-command defaults that differ from PARAM_DEFAULTS.
COMMAND_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "prop4-check": {"t": 0.5, "n_space": 512, "sigma": "affine:1,0.5"},
    "rate": {"sigma": "sinusoidal:1,0.5,1"},
}


# --- Argument parsing ---

def build_parser(pre_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varheat",
        description="Variation statistics and estimators for the fractional stochastic heat equation",
        parents=[pre_parser],
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Base seed (default 7)')
    common.add_argument('--output-dir', dest='output_dir', default=None, help='Run root (env VARHEAT_OUTPUT_DIR)')
    common.add_argument('--format', dest='output_format', choices=('csv', 'json'), default=None)
    common.add_argument('--threads', type=int, default=None, help='Worker cap (env VARHEAT_THREADS)')

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument('--alpha', type=float, default=None)
    model.add_argument('--theta', type=float, default=None)
    model.add_argument('--hurst', type=float, default=None)
    model.add_argument('--sigma', default=None, help="constant:c | affine:a,b | sinusoidal:a,b,omega")
    model.add_argument('--n', type=int, default=None, help='Observation grid size N')
    model.add_argument('--n-space', dest='n_space', type=int, default=None)
    model.add_argument('--c0', type=float, default=None)
    model.add_argument('--cy', type=float, default=None, help='Perturbation scale c_Y')
    model.add_argument('--t-start', dest='t_start', type=float, default=None)
    model.add_argument('--t-end', dest='t_end', type=float, default=None)
    model.add_argument('--replicate', type=int, default=None)
    model.add_argument('--transform', action='store_true', default=None,
                       help='Simulate through the theta clock change (spde)')

    sub = parser.add_subparsers(dest='command', required=True)
    p = sub.add_parser('kernel-check', parents=[common], help='Green kernel identities')
    p.add_argument('--alpha', type=float, default=None)
    p.add_argument('--t', type=float, default=None)
    p.add_argument('--abs-tol', dest='abs_tol', type=float, default=None)

    p = sub.add_parser('sample', parents=[common, model], help='Draw one path')
    p.add_argument('--process', choices=PROCESSES, required=True)
    p.add_argument('--snapshot-every', dest='snapshot_every', type=int, default=None)

    p = sub.add_parser('variation', parents=[common, model], help='Variation statistic of a path')
    p.add_argument('--kind', choices=('quad', 'power', 'fbm'), required=True)
    p.add_argument('--input', default=None, help='Path CSV written by sample')
    p.add_argument('--simulate', action='store_true', default=None, help='Draw a path instead of reading one')
    p.add_argument('--process', choices=PROCESSES, default=None, help='Process to simulate (default u0)')
    p.add_argument('--p', type=float, default=None, help='Order of the power variation')

    p = sub.add_parser('estimate', parents=[common, model], help='Estimate alpha or theta')
    p.add_argument('--target', choices=('alpha', 'alpha_corrected', 'theta1', 'theta2'), required=True)
    p.add_argument('--input', default=None)
    p.add_argument('--process', choices=('u0', 'spde'), default=None)

    p = sub.add_parser('rate', parents=[common, model], help='Monte Carlo rate or consistency experiment')
    p.add_argument('--target', required=True)
    p.add_argument('--process', choices=('u0', 'spde'), default=None)
    p.add_argument('--n-grid', dest='n_grid', default=None, help='e.g. 256,1024,4096,16384')
    p.add_argument('--reps', type=int, default=None)
    p.add_argument('--allow-small', dest='allow_small', action='store_true', default=None)

    p = sub.add_parser('prop4-check', parents=[common, model], help='Coupled-increment bound over a delta ladder')
    p.add_argument('--t', type=float, default=None)
    p.add_argument('--delta-ladder', dest='delta_ladder', default=None, help='e.g. 0.015625,0.0078125')
    p.add_argument('--reps', type=int, default=None)
    p.add_argument('--allow-small', dest='allow_small', action='store_true', default=None)

    p = sub.add_parser('rerun', help='Re-run a command from its manifest.json')
    p.add_argument('manifest')
    p.add_argument('--output-dir', dest='output_dir', default=None, help='Run root (default: beside the original run)')
    return parser


def _validate(command: str, params: Dict[str, Any]) -> None:
    """Rejects out-of-range parameters before a run directory exists."""
    from .experiments import ESTIMATOR_TARGETS, RATE_TARGETS
    from .experiments.rates import MIN_GRID_POINTS, check_grid, check_replicates
    from .gaussian import PerturbedFbmSpec, even_power_order
    from .kernel import KernelParams
    from .spde_sim import SimConfig, check_coupling_window

    sigma = _sigma(params)
    try:
        alpha, theta, hurst, t = (float(params[k]) for k in ("alpha", "theta", "hurst", "t"))
        n, n_space, replicate = (int(params[k]) for k in ("n", "n_space", "replicate"))
        t_start, t_end = float(params["t_start"]), float(params["t_end"])
        reps = int(params["reps"])
        KernelParams(alpha, abs_tol=float(params["abs_tol"]))
    except (TypeError, ValueError) as e:
        raise InvalidArgumentError(f"non-numeric parameter: {e}")
    if not theta > 0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    if not 0.0 < hurst < 1.0:
        raise InvalidArgumentError(f"hurst must lie in (0, 1), got {hurst}")
    if not t > 0:
        raise InvalidArgumentError(f"t must be positive, got {t}")

    process = params.get("process")
    strict = not params.get("allow_small")
    if command in ("sample", "variation", "estimate"):
        minimum = 4 if command == "estimate" else 2
        if n < minimum:
            raise InvalidArgumentError(f"n must be >= {minimum}, got {n}")
        if replicate < 0:
            raise InvalidArgumentError(f"replicate must be non-negative, got {replicate}")
        if not 0.0 <= t_start < t_end:
            raise InvalidArgumentError(f"need 0 <= t_start < t_end, got [{t_start}, {t_end}]")
        if process == "perturbed":
            PerturbedFbmSpec(float(params["c0"]), hurst, float(params["cy"]))
        if process == "spde" and not params.get("input"):
            _sim_config(params, 0).validate()
        if command == "estimate" and params.get("target") == "theta2":
            even_power_order(alpha)
    elif command == "rate":
        target = params.get("target")
        targets = RATE_TARGETS + ESTIMATOR_TARGETS + (PAIR_TARGET,)
        if target not in targets:
            raise InvalidArgumentError(f"rate target must be one of {targets}, got '{target}'")
        grid = check_grid(_int_list(params["n_grid"]), MIN_GRID_POINTS if strict else 2)
        check_replicates(reps, strict)
        if target == "perturbed_vn":
            PerturbedFbmSpec(float(params["c0"]), hurst, float(params["cy"]))
        if target in ("nonlinear_un", "theta2", PAIR_TARGET):
            even_power_order(alpha)
        if target.startswith("nonlinear") or process == "spde":
            SimConfig(alpha=alpha, theta=theta, sigma=sigma, grid_n=grid[-1], n_space=n_space,
                      t_horizon=max(1.0, theta)).validate()
    elif command == "prop4-check":
        if reps < 2:
            raise InvalidArgumentError(f"need at least 2 replicates, got {reps}")
        sim = SimConfig(alpha=alpha, theta=theta, sigma=sigma, n_space=n_space, subgrid_closure=False).validate()
        ladder = _float_list(params["delta_ladder"])
        if len(ladder) < 2:
            raise InvalidArgumentError(f"delta ladder needs at least two rungs, got {ladder}")
        for delta in ladder:
            check_coupling_window(sim, t, delta)


def _resolve(command: str, flags: Dict[str, Any], config_path: Optional[str]):
    settings = config.load_run_config(flags, config_path)
    params = {**PARAM_DEFAULTS, **COMMAND_DEFAULTS.get(command, {}), **settings.params}
    _validate(command, params)
    settings.params = params
    return settings, params


def run_command(command: str, flags: Dict[str, Any], config_path: Optional[str], log_level: str,
                run_suffix: str = "") -> int:
    from .serialization import spec_hash, write_manifest

    started_at = datetime.now(timezone.utc)
    start = time.monotonic()
    settings, params = _resolve(command, flags, config_path)
    run_config = {k: v for k, v in settings.to_dict().items() if k not in ("params", "output_dir", "log_level", "threads")}
    digest = spec_hash(command, params, run_config)
    run_dir = os.path.join(settings.output_dir, f"{command}-{digest[:12]}{run_suffix}")
    os.makedirs(run_dir, exist_ok=True)
    setup_logging(log_level, run_dir)
    logger.info(f"🚀 varheat {command} seed={settings.seed} -> {run_dir}")
    logger.debug(f"Parameters: {params}")

    outputs = COMMANDS[command](params, settings, run_dir)
    duration = time.monotonic() - start
    manifest = write_manifest(run_dir, command, params, settings.seed, run_config, started_at, duration, outputs)
    logger.info(f"✅ {command} finished in {duration:.2f}s; manifest {manifest}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    # --- Pre-parse for --debug ---
    pre_parser = argparse.ArgumentParser(add_help=False)
    pre_parser.add_argument('--debug', action='store_true', help='Enable debug logging')
    pre_parser.add_argument('--config', default=None, help='YAML run configuration')
    pre_args, _ = pre_parser.parse_known_args(argv)
    log_level = "DEBUG" if pre_args.debug else os.getenv(config.ENV_LOG_LEVEL, config.DEFAULT_LOG_LEVEL)
    setup_logging(log_level)
    # ---------------------------

    parser = build_parser(pre_parser)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    logger.debug(f"Parsed arguments: {args}")

    try:
        if args.command == "rerun":
            from .serialization import read_json
            manifest = read_json(args.manifest)
            if "command" not in manifest or manifest["command"] not in COMMANDS:
                raise InvalidArgumentError(f"{args.manifest} is not a varheat manifest")
            flags = dict(manifest.get("config", {}), **manifest.get("args", {}), seed=manifest.get("seed"))
            # Sibling of the original run directory, which stays untouched.
            flags["output_dir"] = args.output_dir or os.path.dirname(os.path.dirname(os.path.abspath(args.manifest)))
            return run_command(manifest["command"], flags, None, log_level, run_suffix=RERUN_SUFFIX)
        flags = {k: v for k, v in vars(args).items() if k not in ("command", "debug", "config")}
        return run_command(args.command, flags, args.config or pre_args.config, log_level)
    except InvalidArgumentError as e:
        logger.error(f"❌ Invalid argument: {e}")
        return EXIT_INVALID
    except NumericalFailureError as e:
        logger.error(f"❌ Numerical failure: {e}")
        return EXIT_NUMERICAL
    except VarheatError as e:
        cause = getattr(e, "cause", None)
        if isinstance(cause, InvalidArgumentError):
            logger.error(f"❌ {e}")
            return EXIT_INVALID
        if isinstance(cause, NumericalFailureError):
            logger.error(f"❌ {e}")
            return EXIT_NUMERICAL
        logger.exception(f"💥 {e}")
        return EXIT_FAILURE
    except Exception as e:
        logger.exception(f"💥 Unexpected error: {e}")
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
