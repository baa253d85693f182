"""
On-disk formats: path CSV, variation rows, estimate/report JSON, field
snapshots and the run manifest.

Floats are written with repr() so every value reads back bit-identically.
"""
import csv
import hashlib
import json
import logging
import os
from datetime import datetime
from importlib import metadata
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidArgumentError
from .gaussian import Path

logger = logging.getLogger(__name__)

PATH_FORMAT_TAG = "varheat-path v1"
PATH_COLUMNS = ("i", "t_i", "value")
VARIATION_COLUMNS = ("kind", "n", "alpha_or_h", "p", "statistic")
REPORT_COLUMNS = ("n", "error", "se", "replicates")
MANIFEST_NAME = "manifest.json"
VERSIONED_PACKAGES = ("varheat", "numpy", "scipy", "PyYAML", "python-dotenv")


def _float(value: float) -> str:
    return repr(float(value))


def _json_default(obj: Any) -> Any:
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dumps(data: Any) -> str:
    """Stable JSON text: sorted keys, two-space indent."""
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default)


def write_json(filename: str, data: Any) -> str:
    with open(filename, "w", encoding="utf-8") as handle:
        handle.write(dumps(data))
        handle.write("\n")
    logger.debug(f"Wrote {filename}")
    return filename


def read_json(filename: str) -> Any:
    try:
        with open(filename, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise InvalidArgumentError(f"file not found: {filename}")
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"{filename} is not valid JSON: {e}")


# --- paths ---

def write_path_csv(filename: str, path: Path) -> str:
    """
    Eight '#' header lines with the Path metadata, then the column row and
    one row per grid point.
    """
    header = [
        PATH_FORMAT_TAG,
        f"meta: {path.meta}",
        f"grid_n: {path.grid_n}",
        f"spatial_point: {_float(path.spatial_point)}",
        f"t_start: {_float(path.t_start)}",
        f"t_end: {_float(path.t_end)}",
        f"attributes: {json.dumps(path.attributes, sort_keys=True, default=_json_default)}",
        f"columns: {','.join(PATH_COLUMNS)}",
    ]
    times = path.times
    with open(filename, "w", encoding="utf-8", newline="") as handle:
        for line in header:
            handle.write(f"# {line}\n")
        writer = csv.writer(handle)
        writer.writerow(PATH_COLUMNS)
        for i, (t, v) in enumerate(zip(times, path.values)):
            writer.writerow((i, _float(t), _float(v)))
    logger.debug(f"Wrote path ({path.meta}, N={path.grid_n}) to {filename}")
    return filename


def read_path_csv(filename: str) -> Path:
    """
    Raises:
        InvalidArgumentError: missing file or malformed content.
    """
    if not os.path.isfile(filename):
        raise InvalidArgumentError(f"path file not found: {filename}")
    header: Dict[str, str] = {}
    rows: List[str] = []
    with open(filename, "r", encoding="utf-8", newline="") as handle:
        for line in handle:
            if not line.startswith("#"):
                rows.append(line)
                continue
            key, sep, value = line[1:].strip().partition(": ")
            if sep:
                header[key] = value
    try:
        reader = csv.reader(rows)
        columns = next(reader)
        if tuple(columns) != PATH_COLUMNS:
            raise InvalidArgumentError(f"{filename}: expected columns {PATH_COLUMNS}, got {columns}")
        values = [float(row[2]) for row in reader if row]
        return Path(values=np.asarray(values), grid_n=int(header["grid_n"]), spatial_point=float(header["spatial_point"]),
                    meta=header["meta"], t_start=float(header["t_start"]), t_end=float(header["t_end"]),
                    attributes=json.loads(header.get("attributes", "{}")))
    except (KeyError, ValueError, IndexError, StopIteration) as e:
        raise InvalidArgumentError(f"{filename} is not a valid path file: {e}")


# --- statistics and reports ---

def write_variation_rows(filename: str, rows: Iterable[Tuple[str, int, float, Optional[float], float]]) -> str:
    with open(filename, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(VARIATION_COLUMNS)
        for kind, n, alpha_or_h, p, statistic in rows:
            writer.writerow((kind, n, _float(alpha_or_h), "" if p is None else _float(p), _float(statistic)))
    return filename


def write_report(directory: str, stem: str, report) -> List[str]:
    """McReport as CSV (one row per N) plus a JSON summary."""
    csv_name = os.path.join(directory, f"{stem}.csv")
    with open(csv_name, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        for n, error, se, replicates in report.rows():
            writer.writerow((n, _float(error), _float(se), replicates))
    json_name = write_json(os.path.join(directory, f"{stem}.json"), report.summary())
    return [csv_name, json_name]


def write_snapshots(directory: str, snapshots: Sequence[Tuple[float, np.ndarray]], meta: Dict[str, Any],
                    stem: str = "field_snapshots") -> List[str]:
    """Row-major float64 binary of shape (snapshots, n_space) plus a JSON sidecar."""
    if not snapshots:
        return []
    field = np.ascontiguousarray(np.stack([values for _, values in snapshots]), dtype="<f8")
    bin_name = os.path.join(directory, f"{stem}.bin")
    field.tofile(bin_name)
    sidecar = {"dimensions": list(field.shape), "dtype": "float64", "byte_order": "little",
               "times": [t for t, _ in snapshots], **meta}
    return [bin_name, write_json(os.path.join(directory, f"{stem}.json"), sidecar)]


def read_snapshots(bin_name: str) -> Tuple[np.ndarray, Dict[str, Any]]:
    sidecar = read_json(os.path.splitext(bin_name)[0] + ".json")
    field = np.fromfile(bin_name, dtype="<f8").reshape(sidecar["dimensions"])
    return field, sidecar


# --- manifest ---

def module_versions() -> Dict[str, str]:
    versions = {}
    for name in VERSIONED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def spec_hash(command: str, args: Dict[str, Any], config: Dict[str, Any]) -> str:
    payload = json.dumps({"command": command, "args": args, "config": config}, sort_keys=True, default=_json_default)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def write_manifest(directory: str, command: str, args: Dict[str, Any], seed: int, config: Dict[str, Any],
                   started_at: datetime, duration_s: float, outputs: Sequence[str]) -> str:
    """manifest.json: everything needed to re-run the command."""
    manifest = {
        "command": command,
        "args": args,
        "seed": seed,
        "spec_hash": spec_hash(command, args, config),
        "started_at": started_at.isoformat(timespec="seconds"),
        "duration_s": duration_s,
        "outputs": sorted(os.path.relpath(o, directory) for o in outputs),
        "config": config,
        "module_versions": module_versions(),
    }
    return write_json(os.path.join(directory, MANIFEST_NAME), manifest)
