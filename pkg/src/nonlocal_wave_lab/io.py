"""CSV and JSON output for waves, trajectories, curves and reports.

Floats are written with 17 significant digits (round-trip exact), ``.`` as
decimal separator and no thousands separators, so repeated runs with the
same configuration give byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .evolution import Trajectory
from .model import PDEModel
from .spectral import GridFunction, make_grid
from .waves import TravelingWave, wave_from_profile

__all__ = [
    "format_value",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
    "to_jsonable",
    "model_hash",
    "save_wave",
    "load_wave",
    "save_trajectory",
]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> dict:
    """Columns of a numeric CSV file as float arrays keyed by header name."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, j] for j, name in enumerate(header)}


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if hasattr(obj, "numerator") and hasattr(obj, "denominator") and not isinstance(obj, int):
        return f"{obj.numerator}/{obj.denominator}"
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def model_hash(model: PDEModel) -> str:
    blob = json.dumps(to_jsonable(model.to_dict()), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def save_wave(wave: TravelingWave, directory, stem: str = "wave") -> tuple[Path, Path]:
    """Write ``<stem>.json`` (model, c, diagnostics) and ``<stem>.csv`` (x, phi)."""
    directory = Path(directory)
    header = write_json(directory / f"{stem}.json", wave.to_dict())
    table = write_csv(directory / f"{stem}.csv", ("x", "phi"), zip(wave.grid.x, wave.profile.values))
    return header, table


def load_wave(directory, stem: str = "wave") -> TravelingWave:
    """Inverse of :func:`save_wave`; diagnostics are recomputed from the profile."""
    directory = Path(directory)
    meta = read_json(directory / f"{stem}.json")
    grid = make_grid(meta["grid"]["n"], meta["grid"]["length"])
    model = PDEModel.from_dict(meta["model"])
    cols = read_csv(directory / f"{stem}.csv")
    profile = GridFunction(grid, cols["phi"])
    return wave_from_profile(
        profile,
        model,
        meta["c"],
        tol=meta["tol"],
        iterations=meta["diagnostics"]["iterations"],
        stabilizing_factor=meta["diagnostics"]["stabilizing_factor_final"],
        method=meta["method"],
    )


def save_trajectory(traj: Trajectory, directory, snapshots: bool = True) -> Path:
    """Write ``diagnostics.csv``, numbered snapshot CSVs and ``manifest.json``."""
    directory = Path(directory)
    cols = ("t",) + Trajectory.SERIES
    write_csv(
        directory / "diagnostics.csv",
        cols,
        zip(traj.times, *(traj.series[k] for k in Trajectory.SERIES)),
    )
    if snapshots:
        for k, s in zip(traj.snapshot_index, traj.snapshots):
            write_csv(
                directory / "snapshots" / f"snapshot_{int(k):06d}.csv",
                ("x", "u", "w"),
                zip(traj.grid.x, s.u.values, s.w.values),
            )
        write_csv(
            directory / "snapshots" / "index.csv",
            ("step", "t"),
            ((int(k), s.t) for k, s in zip(traj.snapshot_index, traj.snapshots)),
        )
    return write_json(directory / "trajectory.json", traj.manifest())
