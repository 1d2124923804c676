import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modlab.cli.main import OUT_ENV, main, run_experiment
from modlab.config import (EXPERIMENT_IDS, ConfigError, format_ini, load_config, parse_float,
                           parse_int_list)
from modlab.io import dumps, read_csv_header, read_json, read_snapshot, write_snapshot
from modlab.solver import gaussian_bump

# small configs, one per experiment, for schema and determinism checks
SMALL = {
    "path": "[path]\nkind = brownian\nn = 256\n[experiment]\nseeds = 0, 1\n",
    "localtime": "[path]\nkind = brownian\nn = 512\n[localtime]\nn_bins = 32\n",
    "irregularity": "[path]\nkind = identity\nn = 256\n[irregularity]\nn_xi = 64\n",
    "occupation-check": "[path]\nkind = identity\nn = 256\n[occupation]\nn_bins = 256\n",
    "strichartz-transfer": ("[experiment]\nseeds = 0\n[path]\nn = 2048\n[data]\nN = 16\nn_max = 4\ncount = 2\n"
                            "[strichartz]\nz_points = 501\nn_bins = 64\n"),
    "cw-vanishing": "[experiment]\nseeds = 0, 1\n[path]\nn = 8192\n",
    "solve": "[grid]\nN = 32\n[run]\ndt = 0.01\nT = 0.1\nsnapshot_stride = 5\n[path]\nT = 0.1\nn = 10\n",
    "blowup-contrast": ("[grid]\nN = 64\n[run]\ndt = 1e-3\nT = 0.01\nsnapshot_stride = 5\n"
                        "[contrast]\npath_n = 100\n"),
    "atoms-suite": ("[atoms]\nn_paths = 5\nk_max = 5\nsweep_instances = 10\nwitnesses_small = 100\n"
                    "witnesses_large = 1000\n"),
    "resonance-suite": ("[resonance]\nn_range = 8\nwick_k_max = 5\noracle_nmax = 2\nweighted_N = 2\n"
                        "weighted_draws = 2\nstrip_N = 4, 4, 2, 2\nstrip_center0 = 3, 0\n"
                        "strip_center1 = 3, 0\ncauchy_tol = 1\n"),
}

SCHEMAS = {
    "path": {"path_s0.csv": ["t", "w"], "path_s1.csv": ["t", "w"]},
    "localtime": {"localtime_s0.csv": ["t", "z", "density"]},
    "irregularity": {"irregularity.csv": ["seed", "gamma", "rho_hat", "constant"]},
    "occupation-check": {"occupation.csv": ["seed", "n_bins", "lhs", "rhs", "rel_err"]},
    "strichartz-transfer": {"strichartz.csv": ["seed", "sample", "lhs", "sup_L", "rhs", "margin", "inf_L",
                                               "lower", "lower_J"]},
    "cw-vanishing": {"cw.csv": ["seed", "kind", "t", "sup_L"]},
    "solve": {"trajectory.csv": ["t", "mass", "H1", "Linf"], "final.csv": ["x", "re", "im"]},
    "blowup-contrast": {"trajectory_identity.csv": ["t", "mass", "H1", "Linf"],
                        "trajectory_brownian_s42.csv": ["t", "mass", "H1", "Linf"]},
    "atoms-suite": {"vp_oracle.csv": ["index", "K", "dp", "bruteforce", "abs_diff"]},
    "resonance-suite": {"wick.csv": ["r_prime_rho", "M", "S", "diff", "tail_bound"]},
}


def small_cfg(exp):
    return load_config(SMALL[exp], exp)


@pytest.mark.parametrize("exp", EXPERIMENT_IDS)
def test_csv_column_schemas(exp, tmp_path):
    report = run_experiment(small_cfg(exp), tmp_path)
    for name, header in SCHEMAS[exp].items():
        assert name in report["outputs"]
        assert read_csv_header(tmp_path / name) == header
    manifest = read_json(tmp_path / "manifest.json")
    assert set(manifest["files"]) == set(report["outputs"]) | {"report.json"}
    assert "wall_seconds" in manifest["timings"]


@pytest.mark.parametrize("exp", ["path", "occupation-check", "atoms-suite", "solve"])
def test_report_byte_identical(exp, tmp_path):
    cfg = small_cfg(exp)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in sorted(os.listdir(tmp_path / "a")):
        if name == "manifest.json":
            continue
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name


def test_parallel_seeds_match_serial(tmp_path):
    cfg = load_config(SMALL["cw-vanishing"], "cw-vanishing")
    serial = run_experiment(cfg, tmp_path / "s")
    cfg.jobs = 2
    par = run_experiment(cfg, tmp_path / "p")
    assert dumps(serial["results"]) == dumps(par["results"])
    assert (tmp_path / "s" / "cw.csv").read_bytes() == (tmp_path / "p" / "cw.csv").read_bytes()


def test_report_contents(tmp_path):
    report = run_experiment(small_cfg("blowup-contrast"), tmp_path)
    on_disk = read_json(tmp_path / "report.json")
    assert on_disk["experiment"] == "blowup-contrast"
    assert on_disk["config"]["params"]["grid"]["N"] == 64
    assert "not a theorem" in on_disk["label"]
    assert on_disk["all_passed"] == all(v["passed"] for v in report["verdicts"])
    for v in on_disk["verdicts"]:
        assert set(v) == {"name", "checks", "value", "tolerance", "relation", "passed"}


# --- configuration ---------------------------------------------------------

@pytest.mark.parametrize("exp", EXPERIMENT_IDS)
def test_config_roundtrip(exp):
    cfg = load_config(SMALL[exp], exp)
    again = load_config(format_ini(cfg))
    assert again.experiment == cfg.experiment
    assert again.params == cfg.params
    assert again.seeds == cfg.seeds and again.jobs == cfg.jobs


@pytest.mark.parametrize("text, exp, field", [
    ("[bogus]\nx = 1\n", "path", "bogus"),
    ("[path]\nwidth = 3\n", "path", "path.width"),
    ("[path]\nn = many\n", "path", "path.n"),
    ("[path]\nT = \n", "path", "path.T"),
    ("[run]\nadaptive = maybe\n", "solve", "run.adaptive"),
    ("[experiment]\nid = nope\n", None, "experiment.id"),
    ("[experiment]\nid = path\n", "solve", "experiment.id"),
    ("[experiment]\nseeds = 3-1\n", "path", "experiment"),
    ("[experiment]\njobs = 0\n", "path", "experiment.jobs"),
    ("[experiment]\ncolour = red\n", "path", "experiment.colour"),
    ("[resonance]\nstrip_N = 1, x\n", "resonance-suite", "resonance.strip_N"),
    ("not an ini file\n", "path", "config"),
])
def test_config_errors_name_the_field(text, exp, field):
    with pytest.raises(ConfigError) as err:
        load_config(text, exp)
    assert str(err.value).startswith(field)


def test_missing_experiment_id():
    with pytest.raises(ConfigError, match="experiment.id"):
        load_config("[path]\nn = 4\n")


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config("/nonexistent/x.ini", "path")


@pytest.mark.parametrize("text, expected", [
    ("0-3", [0, 1, 2, 3]), ("5", [5]), ("1, 4-5, 9", [1, 4, 5, 9]), ("", []),
])
def test_int_list(text, expected):
    assert parse_int_list(text) == expected


@pytest.mark.parametrize("text, expected", [("inf", math.inf), ("pi", math.pi), ("2pi", 2 * math.pi),
                                            ("1e-3", 1e-3), (" -2.5 ", -2.5)])
def test_parse_float(text, expected):
    assert parse_float(text) == expected


def test_repo_configs_load():
    root = os.path.join(os.path.dirname(__file__), "..", "configs")
    files = sorted(f for f in os.listdir(root) if f.endswith(".ini"))
    assert files
    for f in files:
        cfg = load_config(os.path.join(root, f))
        assert cfg.experiment in EXPERIMENT_IDS


def test_frozen_blowup_config_matches_defaults():
    root = os.path.join(os.path.dirname(__file__), "..", "configs")
    frozen = load_config(os.path.join(root, "blowup.ini"))
    assert frozen.params == load_config(None, "blowup-contrast").params
    assert frozen.seeds == [42]


# --- command line ----------------------------------------------------------

def write(tmp_path, text, name="c.ini"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def test_exit_zero_and_summary(tmp_path, capsys):
    cfg = write(tmp_path, SMALL["localtime"])
    assert main(["localtime", "run", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "all passed" in out
    assert (tmp_path / "o" / "report.json").is_file()


def test_exit_one_on_failed_verdict(tmp_path, capsys):
    cfg = write(tmp_path, SMALL["localtime"] + "[tolerances]\nmass_abs = -1\n")
    assert main(["localtime", "run", "--config", cfg, "--out", str(tmp_path / "o")]) == 1
    assert "FAIL" in capsys.readouterr().out
    assert read_json(tmp_path / "o" / "report.json")["all_passed"] is False


def test_exit_two_on_bad_config(tmp_path, capsys):
    cfg = write(tmp_path, "[path]\nn = lots\n")
    assert main(["path", "run", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "path.n" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_exit_two_on_runtime_value_error(tmp_path, capsys):
    cfg = write(tmp_path, "[path]\nkind = fbm\nhurst = 1.5\n")
    assert main(["path", "run", "--config", cfg, "--out", str(tmp_path / "o"), "--seed", "1"]) == 2
    assert "Hurst" in capsys.readouterr().err


def test_quiet_seed_and_jobs(tmp_path, capsys):
    cfg = write(tmp_path, SMALL["path"])
    out = tmp_path / "o"
    assert main(["path", "run", "--config", cfg, "--out", str(out), "--seed", "5", "--jobs", "2", "--quiet"]) == 0
    assert capsys.readouterr().out == ""
    report = read_json(out / "report.json")
    assert report["config"]["seeds"] == [5] and report["config"]["jobs"] == 2
    assert report["outputs"] == ["path_s5.csv"]


@pytest.mark.parametrize("flag", [["--seed", "-1"], ["--jobs", "0"]])
def test_invalid_flags(tmp_path, flag):
    assert main(["path", "run", "--out", str(tmp_path / "o")] + flag) == 2


def test_env_default_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_ENV, str(tmp_path / "root"))
    cfg = write(tmp_path, SMALL["occupation-check"])
    assert main(["occupation-check", "run", "--config", cfg, "--quiet"]) == 0
    assert (tmp_path / "root" / "occupation-check" / "report.json").is_file()


@pytest.mark.parametrize("sub, exp", [("strichartz", "strichartz-transfer"), ("cw", "cw-vanishing"),
                                      ("blowup", "blowup-contrast"), ("atoms", "atoms-suite"),
                                      ("resonance", "resonance-suite")])
def test_subcommand_aliases(sub, exp, tmp_path):
    cfg = write(tmp_path, SMALL[exp])
    code = main([sub, "run", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"])
    assert code in (0, 1)
    assert read_json(tmp_path / "o" / "report.json")["experiment"] == exp


def test_console_script_entry_point(tmp_path):
    cfg = write(tmp_path, SMALL["path"])
    proc = subprocess.run([sys.executable, "-m", "modlab.cli.main", "path", "run", "--config", cfg,
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "all passed" in proc.stdout


# --- serialization ---------------------------------------------------------

def test_dumps_deterministic_and_non_finite():
    obj = {"b": [1.0, math.inf, -math.inf], "a": {"z": np.float64(0.1), "y": np.int64(3)}, "c": math.nan}
    text = dumps(obj)
    assert text == dumps(dict(reversed(list(obj.items()))))
    parsed = json.loads(text)
    assert list(parsed) == ["a", "b", "c"]
    assert parsed["b"] == [1.0, "inf", "-inf"] and parsed["c"] == "nan"


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_floats_roundtrip(x):
    assert json.loads(dumps({"x": x}))["x"] == x


def test_snapshot_roundtrip(tmp_path):
    f = gaussian_bump(64, amplitude=2.0)
    write_snapshot(f, 0.25, tmp_path / "s.bin")
    header, values = read_snapshot(tmp_path / "s.bin")
    assert header["N"] == 64 and header["d"] == 1 and header["t"] == 0.25 and header["dtype"] == "<c8"
    np.testing.assert_allclose(values, f.physical(), atol=1e-6)
