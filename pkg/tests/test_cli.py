import csv
import json
import os

import pytest

from psystem import cli
from psystem.io import load_schema

FAST = ["--set", "grid.n_x=32", "--set", "grid.t_max=0.2", "--set", "diagnostics.seeds=2",
        "--quiet"]


def _manifest(d):
    with open(os.path.join(d, "manifest.json")) as fh:
        return json.load(fh)


def _write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return str(p)


def test_constant_data_runs_to_time_limit(tmp_path):
    cfg = _write(tmp_path, "[data]\nfamily = constant\nu = -1\nv = 0.3\n[grid]\nn_x = 16\nt_max = 0.5\n")
    out = str(tmp_path / "o")
    assert cli.main(["simulate", "--config", cfg, "--out", out, "--quiet"]) == 0
    m = _manifest(out)
    assert m["report"]["stop_reason"] == "TimeLimit"
    assert m["report"]["blowup_time"] is None
    assert m["config"]["data"]["v"] == 0.3


def test_output_path_is_a_file(tmp_path):
    target = tmp_path / "taken"
    target.write_text("x")
    assert cli.main(["simulate", "--out", str(target)] + FAST) == cli.EXIT_IO


def test_config_errors(tmp_path, capsys):
    cfg = _write(tmp_path, "[grid]\nnx = 32\n")
    assert cli.main(["simulate", "--config", cfg, "--quiet"]) == cli.EXIT_CONFIG
    assert "did you mean 'n_x'" in capsys.readouterr().err
    assert cli.main(["simulate", "--set", "grid.n_x=3", "--quiet"]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--scenario", "H9", "--quiet"]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.cfg"), "--quiet"]) == cli.EXIT_IO


def test_h1_scenario_records_blowup(tmp_path):
    out = str(tmp_path / "h1")
    code = cli.main(["simulate", "--scenario", "H1", "--out", out, "--quiet",
                     "--set", "grid.n_x=128", "--set", "diagnostics.extrapolate=0.3"])
    assert code == 0
    m = _manifest(out)
    assert m["report"]["stop_reason"] == "BlowUpSuspected"
    tb = m["report"]["blowup_time"]
    assert tb is not None and 3.0 < tb < 12.0
    assert tb < m["t_pred"] < tb + 0.3 * (tb - m["config"]["data"]["t0"])


def test_characteristics_and_riccati(tmp_path):
    out = str(tmp_path / "c")
    assert cli.main(["characteristics", "--out", out] + FAST) == 0
    m = _manifest(out)
    assert "classification" in m
    assert set(m["classification"]["counts"]) == {"First/Forward", "First/Backward",
                                                  "Second/Forward", "Second/Backward"}
    out = str(tmp_path / "r")
    assert cli.main(["riccati", "--out", out] + FAST) == 0
    assert "riccati.csv" in _manifest(out)["files"]


def test_energy_subcommand(tmp_path):
    out = str(tmp_path / "e")
    args = ["energy", "--out", out, "--quiet", "--set", "model.name=cubic", "--set", "grid.n_x=32",
            "--set", "grid.t_max=0.05", "--set", "data.u_mean=0", "--set", "data.u_amp=0.2",
            "--set", "run.stop_policy=continue", "--set", "grid.filter=true"]
    assert cli.main(args) == 0
    m = _manifest(out)
    assert m["verdicts"]["energy"] == "PASS"
    out2 = str(tmp_path / "e2")
    assert cli.main(["energy", "--out", out2] + FAST) == 0
    assert _manifest(out2)["verdicts"]["energy"] == "NotApplicable"


def test_hamiltonian_subcommand(tmp_path):
    drift = {}
    for every in (4, 1):
        out = str(tmp_path / f"h{every}")
        args = ["hamiltonian", "--out", out, "--quiet", "--set", "grid.n_x=32", "--set", "grid.t_max=1.5",
                "--set", f"run.save_every={every}",
                "--set", "hamiltonian.actions=flow, drift, orbit, reduce",
                "--set", "hamiltonian.orbits=1:0, 1:1"]
        assert cli.main(args) == 0
        m = _manifest(out)
        h = m["hamiltonian"]
        drift[every] = h["f_drift"]
        assert h["reduction"]["max_mismatch"] < 1e-12
    # drift comes from interpolating stored frames in time and shrinks with their spacing
    assert drift[1] < drift[4] / 10
    assert {"trajectory.csv", "orbits.csv", "reduction.csv"} <= set(m["files"])
    out2 = str(tmp_path / "hc")
    assert cli.main(["hamiltonian", "--out", out2, "--set", "model.name=cubic",
                     "--set", "data.u_mean=-2"] + FAST) == 0
    assert str(_manifest(out2)["hamiltonian"]).startswith("skipped")


def test_sweep_with_workers(tmp_path):
    out = str(tmp_path / "s")
    args = ["sweep", "--out", out, "--workers", "2", "--set", "sweep.parameter=data.u_amp",
            "--set", "sweep.values=0.05, 0.1, 0.15"] + FAST
    assert cli.main(args) == 0
    with open(os.path.join(out, "sweep.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert [r["dir"] for r in rows] == ["run_000", "run_001", "run_002"]
    assert [float(r["value"]) for r in rows] == [0.05, 0.1, 0.15]
    for r in rows:
        assert _manifest(os.path.join(out, r["dir"]))["config"]["data"]["u_amp"] == float(r["value"])


def test_schema_covers_every_csv(tmp_path):
    schema = load_schema()["files"]
    runs = [["simulate", "--set", "diagnostics.energy=true"], ["characteristics"], ["riccati"],
            ["hamiltonian", "--set", "hamiltonian.actions=flow, orbit, reduce",
             "--set", "hamiltonian.orbits=1:0"],
            ["sweep", "--set", "sweep.parameter=grid.t_max", "--set", "sweep.values=0.1"]]
    seen = set()
    for i, extra in enumerate(runs):
        out = str(tmp_path / f"r{i}")
        assert cli.main([extra[0], "--out", out] + extra[1:] + FAST) == 0
        for root, _, names in os.walk(out):
            for name in names:
                if not name.endswith(".csv"):
                    continue
                seen.add(name)
                with open(os.path.join(root, name)) as fh:
                    header = next(csv.reader(fh))
                assert name in schema, name
                assert header == list(schema[name]["columns"]), name
    assert seen >= {"frames.csv", "history.csv", "characteristics.csv", "paths.csv", "riccati.csv",
                    "trajectory.csv", "orbits.csv", "reduction.csv", "sweep.csv"}


def test_floats_written_with_full_precision(tmp_path):
    out = str(tmp_path / "p")
    assert cli.main(["simulate", "--out", out] + FAST) == 0
    with open(os.path.join(out, "frames.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[1]["x"]) == 1 / 32
    assert any(len(r["u"].lstrip("-").replace(".", "")) >= 15 for r in rows)


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    text = capsys.readouterr().out
    for name in cli.SUBCOMMANDS:
        assert name in text
