import json
from pathlib import Path
from typing import Any, Dict, Mapping, Sequence

import numpy as np

from chiralwalk.errors import DimensionError
from chiralwalk.utils.logger import logger


def _prepare(path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_trajectory_csv(
    path: Path,
    times: np.ndarray,
    site_occupancies: np.ndarray,
    trace_total: np.ndarray,
) -> Path:
    """
    Write a trajectory as CSV.

    Args:
        path: Destination file
        times: Time grid, shape (T,)
        site_occupancies: Occupancies, shape (T, d)
        trace_total: Total trace per time point, shape (T,)

    Returns:
        Path to the written file

    Header is t,site_0,...,site_{d-1},trace; values use 17 significant digits.
    """
    path = _prepare(path)
    n_sites = site_occupancies.shape[1]
    header = ",".join(["t"] + [f"site_{i}" for i in range(n_sites)] + ["trace"])
    table = np.column_stack([times, site_occupancies, trace_total])
    np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")
    logger.debug(f"Trajectory written to {path} ({table.shape[0]} rows)")
    return path


def write_series_csv(path: Path, columns: Mapping[str, Sequence[float]]) -> Path:
    """Write equally long named columns, in insertion order."""
    path = _prepare(path)
    names = list(columns)
    lengths = {len(columns[name]) for name in names}
    if len(lengths) > 1:
        raise DimensionError(f"Columns have different lengths: {sorted(lengths)}")
    table = np.column_stack([np.asarray(columns[name], dtype=float) for name in names])
    np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt="%.17g")
    logger.debug(f"Series written to {path} ({', '.join(names)})")
    return path


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_json(path: Path, payload: Dict[str, Any]) -> Path:
    path = _prepare(path)
    path.write_text(json.dumps(payload, indent=2, default=_to_jsonable))
    logger.debug(f"JSON written to {path}")
    return path


def write_manifest(output_dir: Path, experiment: str, config: Dict[str, Any], files: Sequence[Path]) -> Path:
    """Record the configuration and produced files of one experiment run."""
    manifest = {
        "experiment": experiment,
        "config": config,
        "files": sorted(Path(f).name for f in files),
    }
    return write_json(Path(output_dir) / "manifest.json", manifest)
