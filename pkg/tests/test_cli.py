import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nonlocal_wave_lab import __version__
from nonlocal_wave_lab.cli import (
    OUT_ENV,
    SWEEP_COLUMNS,
    apply_overrides,
    build_model_from_config,
    config_digest,
    load_config,
    main,
    parse_assignment,
    resolve_run_dir,
)
from nonlocal_wave_lab.exceptions import ValidationError
from nonlocal_wave_lab.io import read_csv, read_json
from nonlocal_wave_lab.model import boussinesq, double_dispersion, klein_gordon


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestConfig:
    def test_parse_assignment(self):
        assert parse_assignment("wave.c=0.25") == (["wave", "c"], 0.25)
        assert parse_assignment("wave.method=minimizer") == (["wave", "method"], "minimizer")
        assert parse_assignment("stability.c=[0.1, 0.2]") == (["stability", "c"], [0.1, 0.2])
        with pytest.raises(ValidationError):
            parse_assignment("wave.c")

    def test_precedence(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"wave": {"c": 0.3, "tol": 1e-10}}))
        config = load_config(path, ["wave.c=0.4"])
        assert config["wave"]["c"] == 0.4
        assert config["wave"]["tol"] == 1e-10
        assert config["wave"]["max_iter"] == 2000

    @pytest.mark.parametrize("assignments", [["wave.speed=1"], ["nope.x=1"]])
    def test_unknown_override(self, assignments):
        with pytest.raises(ValidationError, match="unknown"):
            load_config(None, assignments)

    def test_unknown_file_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"grid": {"points": 10}}))
        with pytest.raises(ValidationError, match="grid.points"):
            load_config(path)

    @pytest.mark.parametrize("text", ["[1, 2]", "{not json"])
    def test_bad_file(self, tmp_path, text):
        path = tmp_path / "cfg.json"
        path.write_text(text)
        with pytest.raises(ValidationError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_config(tmp_path / "missing.json")

    def test_apply_overrides_nested(self):
        config = apply_overrides({"model": {"preset": "boussinesq"}}, ["model.p=5"])
        assert config["model"] == {"preset": "boussinesq", "p": 5}

    @pytest.mark.parametrize(
        "block, model",
        [
            ({"preset": "boussinesq", "p": 3}, boussinesq(3)),
            ({"preset": "klein_gordon", "p": 2}, klein_gordon(2)),
            (
                {"preset": "double_dispersion", "p": 3, "a1": 2.0, "a2": 1.0, "sigma": -1},
                double_dispersion(2.0, 1.0, 3, -1),
            ),
        ],
    )
    def test_presets(self, block, model):
        assert build_model_from_config(block) == model

    def test_explicit_model(self):
        assert build_model_from_config(boussinesq(3).to_dict()) == boussinesq(3)

    def test_unknown_preset(self):
        with pytest.raises(ValidationError):
            build_model_from_config({"preset": "kdv", "p": 3})


class TestRunDir:
    def test_precedence(self, monkeypatch, tmp_path):
        config = load_config()
        monkeypatch.setenv(OUT_ENV, str(tmp_path))
        assert resolve_run_dir("wave", config, "explicit") == type(tmp_path)("explicit")
        config["output_dir"] = "fromconfig"
        assert resolve_run_dir("wave", config, None).name == "fromconfig"
        config["output_dir"] = None
        expected = tmp_path / f"wave-{config_digest('wave', config)}"
        assert resolve_run_dir("wave", config, None) == expected

    def test_digest_depends_on_config(self):
        a = load_config()
        b = load_config(None, ["wave.c=0.3"])
        assert config_digest("wave", a) != config_digest("wave", b)
        assert config_digest("wave", a) != config_digest("evolve", a)
        assert config_digest("wave", a) == config_digest("wave", load_config())


class TestCommands:
    def test_exact_amplitude(self, capsys, tmp_path):
        code, out, _ = run(capsys, "exact", "--out", str(tmp_path))
        assert code == 0
        summary = json.loads(out)
        assert abs(summary["result"]["max"] - math.sqrt(2)) <= 1e-12
        cols = read_csv(tmp_path / "wave.csv")
        assert abs(cols["phi"].max() - math.sqrt(2)) <= 1e-12
        manifest = read_json(tmp_path / "manifest.json")
        assert manifest["command"] == "exact"
        assert manifest["version"] == __version__
        assert manifest["config"]["exact"]["family"] == "boussinesq"

    def test_inadmissible_speed_exits_2(self, capsys, tmp_path):
        code, _, err = run(capsys, "wave", "--out", str(tmp_path), "--set", "wave.c=1.5")
        assert code == 2
        record = json.loads(err)
        assert record["error"] == "validation" and record["exit_code"] == 2
        assert "velocity outside admissible range" in record["message"]
        assert read_json(tmp_path / "error.json") == record

    def test_unknown_key_exits_2(self, capsys):
        code, _, err = run(capsys, "wave", "--set", "wave.speed=0.3")
        assert code == 2
        assert "unknown configuration key" in json.loads(err)["message"]

    def test_bad_workers_exits_2(self, capsys, tmp_path):
        assert run(capsys, "wave", "--out", str(tmp_path), "--workers", "0")[0] == 2

    def test_numerical_failure_exits_3(self, capsys, tmp_path):
        code, _, err = run(
            capsys,
            "wave",
            "--out",
            str(tmp_path),
            "--set",
            'model={"preset": "klein_gordon", "p": 3, '
            '"b": {"prefactor": 1.0, "factors": [{"a": 1.0, "e": -2}]}}',
            "--set",
            "wave.c=0.3",
            "--set",
            "wave.max_iter=1",
        )
        assert code == 3
        record = json.loads(err)
        assert record["error"] == "numerical" and record["type"] == "ConvergenceError"
        assert (tmp_path / "error.json").exists()

    def test_deterministic_outputs(self, capsys, tmp_path):
        args = ("evolve", "--set", "evolve.t_end=0.5", "--set", "evolve.dt=0.05", "--set", "grid.n=256")
        assert run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
        assert run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
        files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*.csv"))
        assert files
        for rel in files:
            assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()

    def test_env_root(self, capsys, monkeypatch, tmp_path):
        monkeypatch.setenv(OUT_ENV, str(tmp_path))
        code, out, _ = run(capsys, "exact", "--set", "exact.p=2")
        assert code == 0
        run_dir = json.loads(out)["run_dir"]
        assert run_dir.startswith(str(tmp_path / "exact-"))
        assert (tmp_path / run_dir.split("/")[-1] / "wave.json").exists()

    @pytest.mark.filterwarnings("ignore::nonlocal_wave_lab.waves.TruncationWarning")
    def test_dc_flip(self, capsys, tmp_path):
        code, out, _ = run(
            capsys,
            "dc",
            "--out",
            str(tmp_path),
            "--workers",
            "1",
            "--set",
            "model.p=2",
            "--set",
            "dc.c_max=0.95",
            "--set",
            "dc.c_step=0.05",
        )
        assert code == 0
        flips = json.loads(out)["result"]["flip_points"]
        assert len(flips) == 1
        lo, hi = flips[0]
        # c = 0.5 itself has d'' = 0 and is classed Indeterminate
        assert lo <= 0.5 <= hi and hi - lo <= 0.1 + 1e-9
        lines = (tmp_path / "dc_curve.csv").read_text().splitlines()
        assert lines[0] == "c,m1,d,d1,d1_from_M,d2,class"
        assert len(lines) == 21

    def test_stability_single(self, capsys, tmp_path):
        code, out, _ = run(
            capsys,
            "stability",
            "--out",
            str(tmp_path),
            "--set",
            "grid.n=512",
            "--set",
            "stability.t_end=2",
            "--set",
            "stability.dt=0.02",
        )
        assert code == 0
        assert json.loads(out)["result"]["status"] == "StayedClose"
        assert read_json(tmp_path / "report.json")["status"] == "StayedClose"
        header = (tmp_path / "orbital_distance.csv").read_text().splitlines()[0]
        assert header == "t,distance,sigma_energy,sigma_virial"

    def test_stability_sweep(self, capsys, tmp_path):
        code, _, _ = run(
            capsys,
            "stability",
            "--out",
            str(tmp_path),
            "--workers",
            "2",
            "--set",
            "grid.n=512",
            "--set",
            "stability.t_end=1",
            "--set",
            "stability.dt=0.02",
            "--set",
            "stability.c=[0.6, 0.8]",
            "--set",
            "stability.lambda=[1.0, 1.01]",
        )
        assert code == 0
        header = (tmp_path / "sweep.csv").read_text().splitlines()[0]
        assert tuple(header.split(",")) == SWEEP_COLUMNS
        assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 5

    def test_blowup_needs_large_box(self, capsys, tmp_path):
        code, _, err = run(capsys, "blowup", "--out", str(tmp_path))
        assert code == 2
        assert "hypothesis" in json.loads(err)["message"]

    def test_blowup_rejects_lambda(self, capsys, tmp_path):
        assert run(capsys, "blowup", "--out", str(tmp_path), "--set", "blowup.lambda=1.0")[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "nonlocal_wave_lab", "exact", "--out", str(tmp_path), "--set", "exact.p=2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert np.isclose(json.loads(proc.stdout)["result"]["max"], 1.5, rtol=1e-14)


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out
