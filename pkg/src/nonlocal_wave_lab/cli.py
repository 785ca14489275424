"""Command-line interface: ``nonlocal-wave-lab <command> [--config FILE] [--set k=v]``.

Every command reads one JSON configuration (defaults below, overridden by
the file and then by ``--set`` dot-path assignments), validates all of it
before computing, and writes its outputs plus ``manifest.json`` into a run
directory.  Exit status is 0 on success, 2 for invalid input and 3 for
numerical failures; failures also print a JSON error record.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .evolution import evolve
from .exceptions import NumericalError, ValidationError
from .io import model_hash, save_trajectory, save_wave, to_jsonable, write_csv, write_json
from .model import PDEModel, boussinesq, double_dispersion, improved_boussinesq, klein_gordon
from .spectral import SymbolSpec, make_grid
from .stability import (
    Perturbation,
    blowup_experiment,
    dc_curve,
    perturbed_data,
    stability_experiment,
)
from .waves import (
    ConstrainedMinimizer,
    exact_boussinesq_wave,
    exact_double_dispersion_wave,
    exact_improved_boussinesq_wave,
    TruncationWarning,
    solve_wave_fixed_point,
)

COMMANDS = ("wave", "evolve", "dc", "stability", "blowup", "exact")
OUT_ENV = "NONLOCAL_WAVE_LAB_OUT"
SWEEP_COLUMNS = ("model_hash", "c", "lambda", "status", "ratio", "t_star", "d", "m1")

DEFAULTS = {
    "model": {"preset": "boussinesq", "p": 3},
    "grid": {"n": 1024, "length": 80.0},
    "wave": {"c": 0.5, "tol": 1e-12, "max_iter": 2000, "method": "fixed_point", "dealias": "auto"},
    "evolve": {
        "dt": None,
        "t_end": 10.0,
        "snapshot_stride": 10,
        "blowup_factor": 1e6,
        "lambda": 1.0,
        "h": None,
        "step_control": False,
        "resolution_tol": None,
    },
    "dc": {"c_min": 0.0, "c_max": 0.9, "c_step": 0.02, "fd_step": 1e-3},
    "stability": {
        "c": 0.8,
        "lambda": 1.01,
        "h": None,
        "eps": 0.0,
        "t_end": 50.0,
        "dt": None,
        "ratio_bound": 10.0,
        "snapshot_stride": 10,
    },
    "blowup": {
        "c": 0.0,
        "lambda": 1.05,
        "h": "auto",
        "t_end": 50.0,
        "dt": None,
        "blowup_factor": 1e6,
        "resolution_tol": 1e-6,
        "step_control_target": 0.5,
        "cap": 0.25,
    },
    "exact": {"family": "boussinesq", "p": 3, "c": 0.0, "a1": 1.0, "a2": 1.0, "regime": "A"},
    "output_dir": None,
    "seed": 0,
}

PRESETS = {
    "boussinesq": {"p"},
    "improved_boussinesq": {"p"},
    "klein_gordon": {"p", "b"},
    "double_dispersion": {"p", "a1", "a2", "sigma"},
}


# ---------------------------------------------------------------------------
# Configuration


def parse_assignment(text: str) -> tuple[list, object]:
    if "=" not in text:
        raise ValidationError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(config: dict, assignments) -> dict:
    for text in assignments or ():
        path, value = parse_assignment(text)
        node = config
        for part in path[:-1]:
            if not isinstance(node.get(part), dict):
                if part == "model" or part in DEFAULTS:
                    node[part] = {}
                else:
                    raise ValidationError(f"unknown configuration key: {'.'.join(path)}")
            node = node[part]
        node[path[-1]] = value
    return config


def load_config(path=None, assignments=None) -> dict:
    """Defaults, then the JSON file at ``path``, then ``--set`` overrides; validated."""
    config = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ValidationError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(user, dict):
            raise ValidationError("config must be a JSON object")
        _check_keys(user, DEFAULTS, "")
        for key, value in user.items():
            if key == "model" or not isinstance(DEFAULTS[key], dict):
                config[key] = value
            else:
                if not isinstance(value, dict):
                    raise ValidationError(f"config block {key!r} must be an object")
                config[key].update(value)
    if assignments:
        model_override = any(a.split("=", 1)[0].startswith("model.") for a in assignments)
        apply_overrides(config, assignments)
        _check_keys({k: v for k, v in config.items() if k != "model" or not model_override}, DEFAULTS, "")
    else:
        _check_keys(config, DEFAULTS, "")
    return config


def _check_keys(config: dict, reference: dict, prefix: str):
    for key, value in config.items():
        if key not in reference:
            raise ValidationError(f"unknown configuration key: {prefix}{key}")
        if key == "model":
            continue
        if isinstance(reference[key], dict) and isinstance(value, dict):
            _check_keys(value, reference[key], f"{prefix}{key}.")


def build_model_from_config(block: dict) -> PDEModel:
    if not isinstance(block, dict):
        raise ValidationError("model block must be an object")
    if "preset" not in block:
        return PDEModel.from_dict(block)
    preset = block["preset"]
    if preset not in PRESETS:
        raise ValidationError(f"unknown model preset {preset!r}; choose from {sorted(PRESETS)}")
    extra = set(block) - PRESETS[preset] - {"preset"}
    if extra:
        raise ValidationError(f"unknown keys for preset {preset!r}: {sorted(extra)}")
    if "p" not in block:
        raise ValidationError("model preset needs p")
    p = _number(block["p"], "model.p")
    if preset == "boussinesq":
        return boussinesq(p)
    if preset == "improved_boussinesq":
        return improved_boussinesq(p)
    if preset == "klein_gordon":
        b = SymbolSpec.from_dict(block["b"]) if "b" in block else None
        return klein_gordon(p, b)
    return double_dispersion(
        _number(block.get("a1", 1.0), "model.a1"),
        _number(block.get("a2", 1.0), "model.a2"),
        p,
        int(block.get("sigma", -1)),
    )


def _number(value, name: str, positive: bool = False, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise ValidationError(f"{name} must be finite")
    if positive and value <= 0:
        raise ValidationError(f"{name} must be positive, got {value}")
    return value


def _integer(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return value


def _filter_h(value, name: str):
    if value is None or value == "auto":
        return value
    return _number(value, name, positive=True)


def _as_list(value, name: str) -> list:
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ValidationError(f"{name} must not be empty")
    return [_number(v, name) for v in values]


# ---------------------------------------------------------------------------
# Run directories


def config_digest(command: str, config: dict) -> str:
    blob = json.dumps(to_jsonable({"command": command, "config": config}), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:10]


def resolve_run_dir(command: str, config: dict, out: str | None) -> Path:
    if out:
        return Path(out)
    if config.get("output_dir"):
        return Path(config["output_dir"])
    root = Path(os.environ.get(OUT_ENV, "runs"))
    return root / f"{command}-{config_digest(command, config)}"


def write_manifest(run_dir: Path, command: str, config: dict, result: dict) -> Path:
    return write_json(
        run_dir / "manifest.json",
        {"command": command, "version": __version__, "config": config, "result": result},
    )


# ---------------------------------------------------------------------------
# Commands


def _wave_for(model, c, grid, config):
    w = config["wave"]
    tol = _number(w["tol"], "wave.tol", positive=True)
    max_iter = _integer(w["max_iter"], "wave.max_iter")
    method = w["method"]
    if method == "fixed_point":
        return solve_wave_fixed_point(model, c, grid, tol=tol, max_iter=max_iter, dealias=w["dealias"])
    if method == "minimizer":
        est = ConstrainedMinimizer(model=model, c=c, tol=tol, max_iter=max_iter).fit(grid)
        return est.to_wave(tol=max(tol, 1e-8))
    raise ValidationError(f"wave.method must be 'fixed_point' or 'minimizer', got {method!r}")


def _solver_opts(config) -> dict:
    w = config["wave"]
    return {
        "tol": _number(w["tol"], "wave.tol", positive=True),
        "max_iter": _integer(w["max_iter"], "wave.max_iter"),
    }


def _setup(config):
    model = build_model_from_config(config["model"])
    g = config["grid"]
    grid = make_grid(_integer(g["n"], "grid.n", 16), _number(g["length"], "grid.length", positive=True))
    return model, grid


def cmd_wave(config: dict, run_dir: Path, workers: int = 1) -> dict:
    model, grid = _setup(config)
    c = _number(config["wave"]["c"], "wave.c")
    wave = _wave_for(model, c, grid, config)
    save_wave(wave, run_dir)
    return {"c": c, "converged": wave.converged, **wave.diagnostics.to_dict()}


def cmd_exact(config: dict, run_dir: Path, workers: int = 1) -> dict:
    e = config["exact"]
    g = config["grid"]
    grid = make_grid(_integer(g["n"], "grid.n", 16), _number(g["length"], "grid.length", positive=True))
    p = _number(e["p"], "exact.p")
    c = _number(e["c"], "exact.c")
    family = e["family"]
    if family == "boussinesq":
        wave = exact_boussinesq_wave(p, c, grid)
    elif family == "improved_boussinesq":
        wave = exact_improved_boussinesq_wave(p, c, grid)
    elif family == "double_dispersion":
        wave = exact_double_dispersion_wave(
            p, c, _number(e["a1"], "exact.a1"), _number(e["a2"], "exact.a2"), grid, e["regime"]
        )
    else:
        raise ValidationError(
            f"exact.family must be boussinesq, improved_boussinesq or double_dispersion, got {family!r}"
        )
    save_wave(wave, run_dir)
    return {"family": family, "c": c, "max": float(wave.profile.values.max()), **wave.diagnostics.to_dict()}


def cmd_evolve(config: dict, run_dir: Path, workers: int = 1) -> dict:
    model, grid = _setup(config)
    ev = config["evolve"]
    c = _number(config["wave"]["c"], "wave.c")
    dt = _number(ev["dt"], "evolve.dt", allow_none=True)
    t_end = _number(ev["t_end"], "evolve.t_end")
    lam = _number(ev["lambda"], "evolve.lambda", positive=True)
    pert = Perturbation(lam=lam, h=_filter_h(ev["h"], "evolve.h"))
    opts = dict(
        snapshot_stride=_integer(ev["snapshot_stride"], "evolve.snapshot_stride"),
        blowup_factor=_number(ev["blowup_factor"], "evolve.blowup_factor", positive=True),
        step_control=bool(ev["step_control"]),
        resolution_tol=_number(ev["resolution_tol"], "evolve.resolution_tol", positive=True, allow_none=True),
    )
    wave = _wave_for(model, c, grid, config)
    traj = evolve(perturbed_data(wave, pert), model, dt, t_end, **opts)
    save_trajectory(traj, run_dir)
    return traj.manifest()


def cmd_dc(config: dict, run_dir: Path, workers: int = 1) -> dict:
    model, grid = _setup(config)
    dc = config["dc"]
    lo = _number(dc["c_min"], "dc.c_min")
    hi = _number(dc["c_max"], "dc.c_max")
    step = _number(dc["c_step"], "dc.c_step", positive=True)
    if hi < lo:
        raise ValidationError("dc.c_max must not be below dc.c_min")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    cs = np.round(lo + step * np.arange(count), 12)
    curve = dc_curve(
        model,
        cs,
        grid,
        _solver_opts(config),
        fd_step=_number(dc["fd_step"], "dc.fd_step", positive=True),
        workers=workers,
    )
    write_csv(run_dir / "dc_curve.csv", curve.CSV_COLUMNS, curve.rows())
    return {
        "samples": len(cs),
        "flip_points": curve.flip_points(),
        "convex_intervals": curve.convex_intervals(),
    }


def _stability_cell(args):
    model, c, lam, grid, block, seed, wave_opts = args
    pert = Perturbation(lam=lam, h=block["h"], eps=block["eps"], seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        return stability_experiment(
            model,
            c,
            pert,
            block["t_end"],
            grid,
            dt=block["dt"],
            ratio_bound=block["ratio_bound"],
            solver_opts=wave_opts,
            evolve_opts={"snapshot_stride": block["snapshot_stride"]},
        )


def cmd_stability(config: dict, run_dir: Path, workers: int = 1) -> dict:
    model, grid = _setup(config)
    s = dict(config["stability"])
    cs = _as_list(s["c"], "stability.c")
    lams = _as_list(s["lambda"], "stability.lambda")
    s["h"] = _filter_h(s["h"], "stability.h")
    s["eps"] = _number(s["eps"], "stability.eps")
    s["t_end"] = _number(s["t_end"], "stability.t_end", positive=True)
    s["dt"] = _number(s["dt"], "stability.dt", allow_none=True)
    s["ratio_bound"] = _number(s["ratio_bound"], "stability.ratio_bound", positive=True)
    s["snapshot_stride"] = _integer(s["snapshot_stride"], "stability.snapshot_stride")
    for lam in lams:
        Perturbation(lam=lam, h=s["h"], eps=s["eps"])
    wave_opts = _solver_opts(config)
    seed = config.get("seed")
    cells = [(model, c, lam, grid, s, seed, wave_opts) for c in cs for lam in lams]
    if len(cells) == 1:
        rep = _stability_cell(cells[0])
        write_json(run_dir / "report.json", rep.to_dict())
        rows = [
            (t, dist, e, v)
            for t, dist, e, v in zip(rep.times, rep.distances, *rep.sigma_minus)
        ]
        write_csv(run_dir / "orbital_distance.csv", ("t", "distance", "sigma_energy", "sigma_virial"), rows)
        return {"status": rep.status, "ratio": rep.ratio, "t_star": rep.t_star}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(cells))) as pool:
            reports = list(pool.map(_stability_cell, cells))
    else:
        reports = [_stability_cell(cell) for cell in cells]
    mh = model_hash(model)
    rows = [(mh, r.c, r.perturbation.lam, r.status, r.ratio, r.t_star, r.d, r.m1) for r in reports]
    write_csv(run_dir / "sweep.csv", SWEEP_COLUMNS, rows)
    return {"cells": len(rows), "statuses": [r[3] for r in rows]}


def cmd_blowup(config: dict, run_dir: Path, workers: int = 1) -> dict:
    model, grid = _setup(config)
    b = config["blowup"]
    c = _number(b["c"], "blowup.c")
    lam = _number(b["lambda"], "blowup.lambda", positive=True)
    if lam <= 1:
        raise ValidationError(f"blowup.lambda must exceed 1, got {lam}")
    h = _filter_h(b["h"], "blowup.h")
    if h is None:
        raise ValidationError("blowup.h must be 'auto' or a positive cut-off")
    t_end = _number(b["t_end"], "blowup.t_end", positive=True)
    dt = _number(b["dt"], "blowup.dt", allow_none=True)
    opts = {
        "blowup_factor": _number(b["blowup_factor"], "blowup.blowup_factor", positive=True),
        "resolution_tol": _number(
            b["resolution_tol"], "blowup.resolution_tol", positive=True, allow_none=True
        ),
        "step_control_target": _number(b["step_control_target"], "blowup.step_control_target", positive=True),
    }
    cap = _number(b["cap"], "blowup.cap", positive=True)
    wave = _wave_for(model, c, grid, config)
    rep = blowup_experiment(wave, lam, t_end, h=h, dt=dt, cap=cap, evolve_opts=opts)
    write_json(run_dir / "report.json", rep.to_dict())
    save_trajectory(rep.trajectory, run_dir, snapshots=False)
    write_csv(
        run_dir / "invariants.csv",
        ("t", "sigma_minus", "lemma_bound"),
        zip(rep.times, rep.sigma_minus, rep.lemma_bound),
    )
    lv = rep.levine
    write_csv(run_dir / "levine.csv", lv.COLUMNS, lv.rows())
    return rep.to_dict()


HANDLERS = {
    "wave": cmd_wave,
    "evolve": cmd_evolve,
    "dc": cmd_dc,
    "stability": cmd_stability,
    "blowup": cmd_blowup,
    "exact": cmd_exact,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocal-wave-lab",
        description="Traveling waves, stability and blow-up for u_tt - L u_xx = B(g(u))_xx.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS, help="experiment to run")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", help="run directory (default: $%s or ./runs, plus a config hash)" % OUT_ENV)
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration entry by dot path, e.g. wave.c=0.3 (repeatable)",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=os.cpu_count() or 1,
        help="parallel workers for sweeps (default: available cores)",
    )
    return parser


def _fail(kind: str, exc: Exception, code: int, run_dir: Path | None) -> int:
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    if run_dir is not None:
        try:
            write_json(run_dir / "error.json", record)
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run_dir = None
    try:
        if args.workers < 1:
            raise ValidationError("--workers must be at least 1")
        config = load_config(args.config, args.overrides)
        run_dir = resolve_run_dir(args.command, config, args.out)
        result = HANDLERS[args.command](config, run_dir, args.workers)
        write_manifest(run_dir, args.command, config, result)
    except ValidationError as exc:
        return _fail("validation", exc, 2, run_dir)
    except NumericalError as exc:
        return _fail("numerical", exc, 3, run_dir)
    print(json.dumps(to_jsonable({"command": args.command, "run_dir": str(run_dir), "result": result})))
    return 0


if __name__ == "__main__":
    sys.exit(main())
