import json
from pathlib import Path

from usagevalues.cli import main

TINY = {
    "timeline": {"num_weeks": 2, "hours_per_week": 2},
    "model": {
        "storage": {"x_min": 0.0, "x_max": 4.0, "pump_max": 1.0, "turb_max": 1.0,
                    "eta": 0.8},
        "units": [
            {"name": "base", "p_min": 1.0, "p_max": 2.0, "startup_cost": 6.0,
             "variable_cost": 10.0, "speed_class": "slow"},
            {"name": "peak", "p_min": 0.5, "p_max": 2.0, "startup_cost": 2.0,
             "variable_cost": 40.0, "speed_class": "fast"},
        ],
        "ens_penalty": 500.0,
        "final_cost": {"value_per_mwh": 30.0},
        "initial_stock": 2.0,
    },
    "grid": {"num_points": 5},
    "scenarios": {"synth": {"num_scenarios": 2, "num_chronicles": 3,
                            "demand_base": 2.0, "demand_amplitude": 1.0,
                            "demand_noise": 1.0, "outage_prob": 0.3,
                            "outage_len_hours": 1}},
    "seed": 1,
    "structures": ["hd", "dhd"],
    "verify_instances": 4,
    "output_dir": "out",
}


def write_cfg(tmp_path, overrides=None, name="cfg.json"):
    cfg = json.loads(json.dumps(TINY))
    for key, val in (overrides or {}).items():
        cfg[key] = val
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=1))
    return path


def read_all(out_dir: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_solve_writes_artifacts(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["solve", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    names = {p.name for p in out.iterdir()}
    assert {"bellman_hd.csv", "bellman_dhd.csv", "usage_values.csv",
            "comparison.csv", "manifest.json"} <= names
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "solve"
    assert manifest["seed"] == 1
    assert len(manifest["config_sha256"]) == 64


def test_solve_structure_selection(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["solve", "--config", str(cfg), "--structure", "hd",
                 "--out", str(tmp_path / "hd_only")]) == 0
    names = {p.name for p in (tmp_path / "hd_only").iterdir()}
    assert "bellman_hd.csv" in names
    assert "bellman_dhd.csv" not in names
    assert "comparison.csv" not in names


def test_simulate_writes_traces_and_kpis(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["simulate", "--config", str(cfg)]) == 0
    out = tmp_path / "out"
    names = {p.name for p in out.iterdir()}
    for tag in ("hd", "dhd"):
        for c in (1, 2, 3):
            assert f"trace_{tag}_chronicle_{c}.csv" in names
    assert "kpi_summary.csv" in names
    header = (out / "trace_hd_chronicle_1.csv").read_text().splitlines()[0]
    assert header.startswith("chronicle,week,hour,demand,stock,pump,turb,ens,unit_1_commit")


def test_rerun_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["solve", "--config", str(cfg)]) == 0
    assert main(["simulate", "--config", str(cfg)]) == 0
    first = read_all(tmp_path / "out")

    assert main(["solve", "--config", str(cfg)]) == 0
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert read_all(tmp_path / "out") == first

    assert main(["solve", "--config", str(cfg), "--threads", "3"]) == 0
    assert main(["simulate", "--config", str(cfg), "--threads", "3"]) == 0
    assert read_all(tmp_path / "out") == first


def test_malformed_config_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["solve", "--config", str(path)]) == 1
    assert "invalid JSON" in capsys.readouterr().err

    cfg = json.loads(json.dumps(TINY))
    del cfg["model"]["storage"]["x_max"]
    path.write_text(json.dumps(cfg))
    assert main(["solve", "--config", str(path)]) == 1
    assert "x_max" in capsys.readouterr().err


def test_missing_config_exits_one(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.json")]) == 1


def test_increasing_final_cost_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, overrides={})
    raw = json.loads(cfg.read_text())
    raw["model"]["final_cost"] = {"breakpoints": [0.0, 4.0], "values": [0.0, 5.0]}
    cfg.write_text(json.dumps(raw))
    assert main(["solve", "--config", str(cfg)]) == 1
    assert "nonincreasing" in capsys.readouterr().err


def test_synth_roundtrip(tmp_path):
    cfg = write_cfg(tmp_path)
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "data")]) == 0
    scen_csv = tmp_path / "data" / "scenarios.csv"
    chron_csv = tmp_path / "data" / "chronicles.csv"
    assert scen_csv.exists() and chron_csv.exists()

    # a config pointing at the exported files reproduces the synth run
    raw = json.loads(cfg.read_text())
    raw["scenarios"] = {"path": str(scen_csv)}
    raw["chronicles"] = {"path": str(chron_csv)}
    raw["output_dir"] = str(tmp_path / "from_files")
    cfg2 = tmp_path / "cfg2.json"
    cfg2.write_text(json.dumps(raw))
    assert main(["solve", "--config", str(cfg2)]) == 0
    a = (tmp_path / "out" / "bellman_hd.csv")
    if not a.exists():
        assert main(["solve", "--config", str(cfg)]) == 0
    assert (tmp_path / "from_files" / "bellman_hd.csv").read_bytes() == a.read_bytes()


def test_chronicle_mismatch_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path)
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "data")]) == 0
    chron_csv = tmp_path / "data" / "chronicles.csv"
    lines = chron_csv.read_text().splitlines()
    chron_csv.write_text("\n".join(lines[:-1]) + "\n")  # drop one hour
    raw = json.loads(cfg.read_text())
    raw["chronicles"] = {"path": str(chron_csv)}
    cfg.write_text(json.dumps(raw))
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert "chronicle" in capsys.readouterr().err.lower()


def test_verify_toy_config_passes(tmp_path):
    cfg = write_cfg(tmp_path, overrides={"toy_wphr": True, "verify_instances": 4})
    assert main(["verify", "--config", str(cfg)]) == 0


def test_verify_reports_violations_with_exit_two(tmp_path, monkeypatch, capsys):
    import usagevalues.cli as cli
    from usagevalues.campaign import CampaignReport

    def rigged(n, seed, rel_tol=1e-6):
        return CampaignReport(n, 0.5, 0.0, ("instance 0: hd solver=1.5 oracle=1.0",))

    monkeypatch.setattr(cli, "oracle_equivalence_campaign", rigged)
    cfg = write_cfg(tmp_path, overrides={"verify_instances": 1})
    assert main(["verify", "--config", str(cfg)]) == 2
    assert "FAIL" in capsys.readouterr().out


def test_module_entry_point():
    import subprocess
    import sys
    res = subprocess.run([sys.executable, "-m", "usagevalues", "solve", "--help"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "--config" in res.stdout
