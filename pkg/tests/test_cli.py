"""Command line: outputs, determinism, prior fitting, verification, exit codes."""

import csv
import io
import json
import math
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
import yaml
from scipy import integrate as sp_integrate

from thicknull.cli import main
from thicknull.priors import ThickNull, prior_from_dict
from thicknull.report import config_from_dict, load_reference

TABLES = ("table1_power", "table2_decile", "table3_error_rates", "table4_normalized")


def write_config(tmp_path, **overrides):
    raw = {"scenario": {"cases": 2000, "seed": 5}, "output_dir": "out"}
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(raw.get(key), dict):
            raw[key] = {**raw[key], **value}
        else:
            raw[key] = value
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


def read_csv(path):
    lines = Path(path).read_text().splitlines()
    assert lines[0].startswith("# thicknull/") and lines[0].endswith(" v1")
    return list(csv.reader(io.StringIO("\n".join(lines[1:]))))


# -- run -----------------------------------------------------------------------

def test_run_writes_tables_and_manifest(tmp_path, capsys):
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted([t + s for t in TABLES for s in (".csv", ".txt")] + ["manifest.json"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 5 and manifest["cases"] == 2000 and manifest["command"] == "run"
    assert len(manifest["config_hash"]) == 64
    assert set(manifest["versions"]) >= {"python", "numpy", "scipy"}
    assert set(manifest["files"]) == {t + s for t in TABLES for s in (".csv", ".txt")}
    assert "False positive rate" in capsys.readouterr().out
    # the manifest alone is enough to rebuild the run configuration
    rebuilt = config_from_dict(manifest["config"])
    assert rebuilt.scenario.seed == 5 and rebuilt.methods == tuple(manifest["config"]["methods"])


def test_table_contents(tmp_path):
    main(["run", "--config", str(write_config(tmp_path))])
    rows = read_csv(tmp_path / "out" / "table3_error_rates.csv")
    assert rows[0] == ["metric", "conventional", "small_alpha", "mesp", "distance_only", "interval_based", "thick_t"]
    assert [r[0] for r in rows[1:]] == ["fpr", "fnr", "fdr", "for", "success"]
    assert all(0 <= float(v) <= 1 for r in rows[1:] for v in r[1:])
    text = (tmp_path / "out" / "table3_error_rates.txt").read_text()
    assert "%" in text and "Thick t-test" in text
    decile = read_csv(tmp_path / "out" / "table2_decile.csv")
    assert len(decile) == 1 + 20


def test_raw_cases_csv(tmp_path):
    cfg = write_config(tmp_path, emit_raw_cases=True)
    assert main(["run", "--config", str(cfg), "--cases", "10"]) == 0
    rows = read_csv(tmp_path / "out" / "raw_cases.csv")
    header, data = rows[0], rows[1:]
    assert len(data) == 10
    assert header[:10] == ["case_index", "mu", "sigma", "n", "mpsd", "mean", "sd", "null_true", "nominal_power",
                           "relative_mpsd"]
    assert header[10:12] == ["conventional_reject", "conventional_p_value"]
    col = header.index("distance_only_p_value")
    assert all(r[col] == "" for r in data)
    for r in data:
        assert float(r[9]) == float(r[4]) / float(r[2])
        assert int(r[7]) == (abs(float(r[1]) - 100) <= float(r[4]))


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path, emit_raw_cases=True)
    main(["run", "--config", str(cfg), "--output", str(tmp_path / "a")])
    main(["run", "--config", str(cfg), "--output", str(tmp_path / "b")])
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes(), p.name


def test_seed_flag_overrides_config(tmp_path):
    cfg = write_config(tmp_path, emit_raw_cases=True)
    main(["run", "--config", str(cfg), "--cases", "20", "--output", str(tmp_path / "a")])
    main(["run", "--config", str(cfg), "--cases", "20", "--seed", "6", "--output", str(tmp_path / "b")])
    a = (tmp_path / "a" / "raw_cases.csv").read_bytes()
    b = (tmp_path / "b" / "raw_cases.csv").read_bytes()
    assert a != b
    assert json.loads((tmp_path / "b" / "manifest.json").read_text())["seed"] == 6


# -- alpha sweep ---------------------------------------------------------------

def test_alpha_sweep_rows(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["alpha-sweep", "--config", str(cfg)]) == 0
    rows = read_csv(tmp_path / "out" / "alpha_sweep.csv")
    assert rows[0] == ["alpha", "method", "fpr", "tpr"]
    assert len(rows) - 1 == 101 * 6
    distance = {(r[2], r[3]) for r in rows[1:] if r[1] == "distance_only"}
    assert len(distance) == 1


def test_alpha_sweep_custom_grid(tmp_path):
    cfg = write_config(tmp_path, alpha_grid={"start": 0.0, "stop": 0.1, "step": 0.01}, methods=["thick_t"])
    main(["alpha-sweep", "--config", str(cfg)])
    rows = read_csv(tmp_path / "out" / "alpha_sweep.csv")
    assert len(rows) - 1 == 11


# -- fit-prior -----------------------------------------------------------------

def test_fit_prior_symmetric_file(tmp_path):
    effects = tmp_path / "effects.csv"
    effects.write_text("d\n" + "\n".join(f"{v}" for v in (-0.15, -0.05, 0.0, 0.05, 0.15)) + "\n\n")
    out = tmp_path / "prior.json"
    assert main(["fit-prior", str(effects), "--bounds", "-0.2", "0.2", "--output", str(out)]) == 0
    desc = json.loads(out.read_text())
    assert abs(desc["truncated_normal"]["location"]) <= 1e-12
    assert desc["n_used"] == 5 and desc["kde"]["bandwidth"] > 0


def test_fit_prior_filters_to_open_bounds(tmp_path):
    rng = np.random.default_rng(12)
    values = np.concatenate([rng.uniform(-0.199, 0.199, 164), rng.uniform(0.21, 1.5, 150),
                             rng.uniform(-1.5, -0.21, 50), [-0.2, 0.2]])
    rng.shuffle(values)
    effects = tmp_path / "effects.csv"
    effects.write_text("\n".join(repr(float(v)) for v in values) + "\n")
    out = tmp_path / "prior.json"
    main(["fit-prior", str(effects), "--output", str(out)])
    desc = json.loads(out.read_text())
    assert desc["n_total"] == 366 and desc["n_used"] == 164
    inside = sorted(v for v in values if -0.2 < v < 0.2)
    assert sorted(desc["kde"]["sample"]) == inside
    main(["fit-prior", str(effects), "--inclusive", "--output", str(out)])
    assert json.loads(out.read_text())["n_used"] == 166
    # the emitted truncated normal integrates to one over the bounds
    prior = prior_from_dict(desc["truncated_normal"])
    null = ThickNull.from_bounds(-0.2, 0.2)
    total = sp_integrate.quad(lambda x: float(prior.density(x, null)), -0.2, 0.2, epsabs=1e-13)[0]
    assert abs(total - 1) <= 1e-8


def test_fitted_prior_feeds_run(tmp_path):
    effects = tmp_path / "effects.csv"
    effects.write_text("\n".join(str(v) for v in np.linspace(96, 104, 30)) + "\n")
    main(["fit-prior", str(effects), "--bounds", "90", "110", "--output", str(tmp_path / "prior.json")])
    cfg = write_config(tmp_path, methods=["conventional", "thick_t_fitted"],
                       thick_priors={"thick_t_fitted": {"kind": "fitted", "path": "prior.json", "variant": "kde"}})
    assert main(["run", "--config", str(cfg), "--cases", "200"]) == 0
    rows = read_csv(tmp_path / "out" / "table3_error_rates.csv")
    assert rows[0] == ["metric", "conventional", "thick_t_fitted"]


def test_fit_prior_insufficient_data(tmp_path, capsys):
    effects = tmp_path / "effects.csv"
    effects.write_text("0.1\n0.5\n0.9\n")
    assert main(["fit-prior", str(effects)]) == 2
    assert "got 1" in capsys.readouterr().err


def test_fit_prior_rejects_garbage(tmp_path):
    effects = tmp_path / "effects.csv"
    effects.write_text("d\n0.1\nabc\n0.05\n")
    assert main(["fit-prior", str(effects)]) == 2


# -- verify ----------------------------------------------------------------------

def test_verify_quick_run_passes(tmp_path, capsys):
    cfg = write_config(tmp_path, scenario={"cases": 1000, "seed": 2021})
    assert main(["verify", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "0 failed" in out and "SKIP table2/all/1/lower_bound" in out


def test_verify_wrong_reference_fails_with_diff(tmp_path, capsys):
    ref = tmp_path / "ref.csv"
    ref.write_text("scenario,table,null_true,stratum,method,metric,value,tolerance\n"
                   "main,table3,all,all,conventional,fpr,5.0,1.0\n"
                   "main,table3,all,all,thick_t,fpr,5.0,3.0\n")
    cfg = write_config(tmp_path)
    assert main(["verify", "--config", str(cfg), "--reference", str(ref)]) == 1
    out = capsys.readouterr().out
    assert "FAIL table3/all/all/conventional/fpr" in out and "diff=+" in out
    assert "PASS table3/all/all/thick_t/fpr" in out


def test_shipped_reference_is_complete():
    cells = load_reference()
    main_cells = [c for c in cells if c.scenario == "main"]
    count = lambda table, metric=None: sum(c.table == table and (metric is None or c.metric == metric)
                                           for c in main_cells)
    assert count("table1", "success") == 36
    assert count("table2", "success") == 120
    assert count("table2", "lower_bound") + count("table2", "upper_bound") == 20
    assert count("table3") == 30
    assert count("table4") == 36
    assert sum(c.scenario == "normal" and c.metric == "fpr" for c in cells) == 7


# -- exit codes ------------------------------------------------------------------

def test_missing_config_is_io_error(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.yaml")]) == 3
    assert "nope.yaml" in capsys.readouterr().err


@pytest.mark.parametrize("raw", [
    "methods: []\n",
    "methods: [bayes]\n",
    "scenario: {cases: 0}\n",
    "colour: blue\n",
    "decision: {alpha_conventional: 2}\n",
    "methods: [thick_t_flat]\n",
    "thick_priors: {thick_t: {kind: cauchy}}\n",
    "scenario: [\n",
])
def test_bad_config_is_config_error(tmp_path, raw):
    path = tmp_path / "bad.yaml"
    path.write_text(raw)
    assert main(["run", "--config", str(path)]) == 2


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root can write anywhere")
def test_unwritable_output_is_io_error(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir()
    locked.chmod(0o500)
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--cases", "20", "--output", str(locked / "x")]) == 3


def test_output_path_that_is_a_file_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write_config(tmp_path)
    assert main(["run", "--config", str(cfg), "--cases", "20", "--output", str(blocker / "x")]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "thicknull", "run", "--cases", "30", "--seed", "1",
                           "--output", str(tmp_path / "m")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "m" / "manifest.json").exists()
