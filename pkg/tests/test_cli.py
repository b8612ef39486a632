import json
import math
import subprocess
import sys

import pytest

from qfluid.cli import main


def write_cfg(path, **over):
    cfg = {
        "mode": "reg_nslk",
        "grid": {"dim": 1, "n": 16},
        "params": {"mu": 1.0},
        "solver": {"dt": 1e-3, "t_end": 0.05, "report_every": 10},
        "initial_data": {"recipe": "equilibrium"},
        "output_dir": str(path.parent / "out"),
    }
    cfg.update(over)
    path.write_text(json.dumps(cfg))
    return path


def last_status(capsys):
    err = capsys.readouterr().err.strip().splitlines()
    return json.loads(err[-1])


def csv_column(path, name):
    lines = path.read_text().splitlines()
    i = lines[0].split(",").index(name)
    return [float(r.split(",")[i]) for r in lines[1:]]


def test_equilibrium_run_and_report(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "eq.json", params={"mu": 1.0, "nu": 0.1})
    assert main(["run", "--config", str(cfg)]) == 0
    assert last_status(capsys) == {"status": "ok", "reason": ""}
    out = tmp_path / "out"
    mass = csv_column(out / "reports.csv", "mass")
    assert max(mass) == min(mass)
    run_info = json.loads((out / "run.json").read_text())
    assert run_info["config"] == json.loads(cfg.read_text()) and run_info["status"] == "ok"
    assert len(list((out / "snapshots").glob("*.qfld"))) == 6
    assert main(["report", str(out)]) == 0
    text = capsys.readouterr().out
    for col in ("D", "BDD", "Dreg"):
        line = next(l for l in text.splitlines() if l.strip().startswith(col + ":"))
        assert abs(float(line.split("max=")[1].split()[0])) <= 1e-10
    assert (out / "plotdata_E.csv").read_text().startswith("time,value\n")


def test_damping_report_proxy(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "d.json", solver={"dt": 1e-3, "t_end": 1.0, "report_every": 250},
                    initial_data={"recipe": "uniform_flow", "params": {"velocity": [0.1]}})
    assert main(["run", "--config", str(cfg)]) == 0
    assert main(["report", str(tmp_path / "out")]) == 0
    u = csv_column(tmp_path / "out" / "plotdata_u_rms.csv", "value")
    assert u[-1] == pytest.approx(0.1 * math.exp(-1), abs=1e-8)


def test_lambda_prime_violation_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "bad.json", mode="aug_nslk",
                    params={"lambda": 0.01, "mu": 1.0, "nu": 0.5})
    assert main(["run", "--config", str(cfg)]) == 2
    st = last_status(capsys)
    assert st["status"] == "config_error" and "lambda' = lambda - mu*nu/2 > 0" in st["reason"]


@pytest.mark.parametrize("over", [
    {"colour": "blue"},
    {"grid": {"dim": 1, "n": 15}},
    {"params": {"kappa": 1.0}},
    {"solver": {"dt": 1e-3}},
    {"initial_data": {"recipe": "vortex"}},
    {"initial_data": {"recipe": "cosine", "params": {"wobble": 1}}},
    {"params": {"delta1": 1.5}},
])
def test_invalid_configs_exit_2(tmp_path, capsys, over):
    cfg = write_cfg(tmp_path / "c.json", **over)
    assert main(["run", "--config", str(cfg)]) == 2
    assert last_status(capsys)["status"] == "config_error"
    assert not (tmp_path / "out").exists()


def test_usage_errors_exit_2(tmp_path, capsys):
    assert main(["run"]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json")]) == 2
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["run", "--config", str(tmp_path / "junk.json")]) == 2
    cfg = write_cfg(tmp_path / "m.json", mode="sweep")
    assert main(["run", "--config", str(cfg)]) == 2
    assert "does not belong" in last_status(capsys)["reason"]


def test_report_on_empty_dir_exits_2(tmp_path, capsys):
    assert main(["report", str(tmp_path)]) == 2
    assert "reports.csv" in last_status(capsys)["reason"]


def test_vacuum_exits_3_with_partial_output(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "v.json", grid={"dim": 1, "n": 32},
                    params={"lambda": 0.1, "mu": 0.1, "hbar": 0.2, "density_floor": 0.5},
                    solver={"dt": 1e-3, "t_end": 2.0, "report_every": 50},
                    initial_data={"recipe": "cosine", "params": {"amp": 0.5, "uamp": -3.0}})
    assert main(["run", "--config", str(cfg)]) == 3
    assert last_status(capsys)["status"] == "numerical_failure"
    info = json.loads((tmp_path / "out" / "run.json").read_text())
    assert info["status"] == "vacuum" and 0 < info["steps_taken"] < 2000
    assert len(csv_column(tmp_path / "out" / "reports.csv", "time")) > 1


def test_random_runs_are_reproducible(tmp_path, monkeypatch):
    cfg = write_cfg(tmp_path / "r.json", mode="aug_nslk", grid={"dim": 2, "n": 16},
                    params={"nu": 0.1}, initial_data={"recipe": "random"}, seed=7)
    monkeypatch.setenv("QFLUID_OUT", str(tmp_path / "a"))
    assert main(["run", "--config", str(cfg)]) == 0
    # the run.json of a finished run is itself a valid config
    monkeypatch.setenv("QFLUID_OUT", str(tmp_path / "b"))
    assert main(["run", "--config", str(tmp_path / "a" / "run.json")]) == 0
    a = (tmp_path / "a" / "reports.csv").read_bytes()
    assert a == (tmp_path / "b" / "reports.csv").read_bytes()
    assert not (tmp_path / "out").exists()


def test_snapshot_recipe(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "a.json", mode="elk", params={"mu": 0.5}, grid={"dim": 1, "n": 32},
                    initial_data={"recipe": "cosine"})
    assert main(["run", "--config", str(cfg)]) == 0
    snap = sorted((tmp_path / "out" / "snapshots").glob("*.qfld"))[-1]
    cfg2 = write_cfg(tmp_path / "b.json", mode="reg_nslk", params={"mu": 0.5}, grid={"dim": 1, "n": 32},
                     initial_data={"recipe": "snapshot", "path": str(snap)},
                     output_dir=str(tmp_path / "out2"))
    assert main(["run", "--config", str(cfg2)]) == 0
    cfg3 = write_cfg(tmp_path / "c.json", grid={"dim": 1, "n": 64},
                     initial_data={"recipe": "snapshot", "path": str(snap)})
    assert main(["run", "--config", str(cfg3)]) == 2


def test_sl_mode(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "s.json", mode="sl", params={"mu": 0.5}, grid={"dim": 1, "n": 32},
                    initial_data={"recipe": "madelung_wave"})
    assert main(["run", "--config", str(cfg)]) == 0
    mass = csv_column(tmp_path / "out" / "reports.csv", "mass")
    assert max(mass) - min(mass) <= 1e-10 * mass[0]
    head = (tmp_path / "out" / "snapshots" / "t_00000.qfld").read_bytes().split(b"\n")[0]
    assert head == b"QFLD1 dim=1 n=32 comps=2"


def test_certify_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.json", mode="certify", grid={"dim": 1, "n": 32},
                    params={"mu": 0.5}, initial_data={"recipe": "cosine", "params": {"amp": 0.2}},
                    reference={"name": "traveling_wave", "amp": 0.1})
    assert main(["certify", "--config", str(cfg)]) == 0
    cert = json.loads((tmp_path / "out" / "certificate.json").read_text())
    assert cert["verdict"] == "pass"
    cfg = write_cfg(tmp_path / "c0.json", mode="certify", grid={"dim": 1, "n": 32},
                    params={"mu": 0.5}, initial_data={"recipe": "cosine", "params": {"amp": 0.2}},
                    certificate={"C": 0.0, "include_b": False}, output_dir=str(tmp_path / "adv"))
    assert main(["certify", "--config", str(cfg)]) == 0
    assert json.loads((tmp_path / "adv" / "certificate.json").read_text())["verdict"] == "fail"
    assert main(["report", str(tmp_path / "adv")]) == 0
    assert "certificate: verdict=fail" in capsys.readouterr().out


def test_sweep_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "w.json", mode="sweep", grid={"dim": 1, "n": 32},
                    params={"mu": 0.5}, solver={"dt": 2e-3, "t_end": 0.05},
                    initial_data={"recipe": "cosine"}, nu_list=[0.1, 0.05])
    assert main(["sweep", "--config", str(cfg)]) == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "nu,relE_ref,relE_oracle,verdict" and len(lines) == 3
    assert json.loads((tmp_path / "out" / "sweep.json").read_text())["monotone"] is True


def test_oracle_compare_command(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "madelung.json", mode="oracle_compare", grid={"dim": 1, "n": 256},
                    params={"lambda": 1.0, "mu": 0.5, "hbar": 1.0},
                    solver={"dt": 2.5e-4, "t_end": 0.5}, initial_data={"recipe": "madelung_wave"})
    assert main(["oracle-compare", "--config", str(cfg)]) == 0
    summary = capsys.readouterr().out
    l1 = float(summary.split("l1_density=")[1].split()[0])
    assert l1 <= 1e-4
    res = json.loads((tmp_path / "out" / "oracle_compare.json").read_text())
    assert res["l1_density"] == pytest.approx(l1, rel=1e-6)


def test_module_entry_point(tmp_path):
    cfg = write_cfg(tmp_path / "eq.json")
    proc = subprocess.run([sys.executable, "-m", "qfluid", "run", "--config", str(cfg)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stderr.strip().splitlines()[-1])["status"] == "ok"
