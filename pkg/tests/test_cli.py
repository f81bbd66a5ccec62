import json
from fractions import Fraction as F

import pytest

from collapse_lab.cli import main
from collapse_lab.config import RunConfig
from collapse_lab.runs import DEMOS, demo_config, read_run

SMALL = {
    "name": "small",
    "params": {"n": 3, "R": 1.0, "m": 1.0, "kappa": 0.2, "mu": 0.1, "mu1": 0.1, "M0": 2.0, "M1": 1.0},
    "grid": {"N": 32},
    "initial": {"profile": "cosine", "base": 1.0, "amplitude": 1.0, "normalize": True},
    "T": 0.01,
    "output_every": 0.002,
    "moments": {"s0": "half", "gamma": "auto"},
    "certificate": {"T": 5.0},
}


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SMALL))
    return p


def test_region_table(capsys):
    assert main(["region", "table1"]) == 0
    rows = [ln.split(",") for ln in capsys.readouterr().out.splitlines()[1:]]
    got = {(int(r[0]), r[2]): F(r[3]) for r in rows}
    assert got[(3, "JL")] == F(1, 3) and got[(4, "JL")] == F(1, 2) and got[(9, "JL")] == F(1, 2)
    assert got[(3, "PE")] == F(1, 6) and got[(4, "PE")] == F(1, 6) and got[(8, "PE")] == F(1, 14)


def test_region_verdict(capsys):
    assert main(["region", "--n", "3", "--m", "1", "--kappa", "1/4"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["admissible"] and out["gamma_window"] == ["1/2", "2/3"]  # damping floor 2pκ/n = 1/2


def test_simulate_monitor_round_trip(cfg_path, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "ReachedT"
    rec = read_run(out)
    assert rec.snapshots and len(rec.series) == 6
    assert main(["monitor", "--run", str(out), "--strict"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["all_pass"]
    header = (out / "ledger.csv").read_text().splitlines()[0]
    assert header.startswith("t,check_id,lhs,rhs,margin,pass,applicable")


def test_same_config_same_bytes(cfg_path, tmp_path):
    cfg = dict(SMALL, initial={"profile": "cosine", "noise": 0.1})
    p = tmp_path / "noisy.json"
    p.write_text(json.dumps(cfg))
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(p), "--out", str(tmp_path / name), "--seed", "7"]) == 0
    assert (tmp_path / "a" / "series.csv").read_bytes() == (tmp_path / "b" / "series.csv").read_bytes()
    assert main(["simulate", "--config", str(p), "--out", str(tmp_path / "c"), "--seed", "8"]) == 0
    assert (tmp_path / "a" / "series.csv").read_bytes() != (tmp_path / "c" / "series.csv").read_bytes()


def test_certify_report(cfg_path, capsys):
    assert main(["certify", "--config", str(cfg_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    for key in ("gamma", "theta", "s0", "r1", "a", "b", "phi0", "blow_up_time_bound", "feasible"):
        assert key in out
    assert out["feasible"]


def test_certify_empirical(cfg_path, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_path), "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["certify", "--config", str(cfg_path), "--empirical", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["constants"]["source"] == "empirical" and rep["fit"]["C1"] > 0


def test_sweep_rows_and_empty(cfg_path, capsys):
    assert main(["sweep", "--config", str(cfg_path), "--axis", "kappa", "--values", ""]) == 0
    assert capsys.readouterr().out.strip() == "kappa,status,t_star,max_sup_u"
    assert main(["sweep", "--config", str(cfg_path), "--axis", "kappa", "--values", "0.1,0.2", "--jobs", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3 and lines[1].startswith("0.1,ReachedT")


def test_sweep_bad_axis(cfg_path, capsys):
    assert main(["sweep", "--config", str(cfg_path), "--axis", "colour", "--values", "1"]) == 2
    assert "unknown sweep axis" in capsys.readouterr().err


def test_unknown_demo_lists_names(capsys):
    assert main(["demo", "nope"]) == 2
    err = capsys.readouterr().err
    assert all(name in err for name in DEMOS)


def test_missing_run_dir(tmp_path, capsys):
    assert main(["monitor", "--run", str(tmp_path)]) == 2


def test_packaged_demos_load():
    for name in DEMOS:
        cfg = demo_config(name)
        assert RunConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_config_validation():
    with pytest.raises(ValueError, match="unknown config keys"):
        RunConfig.from_dict(dict(SMALL, colour=1))
    cfg = RunConfig.from_dict(SMALL)
    assert cfg.with_value("grid.N", 64).grid.N == 64
    moved = cfg.with_value("M0", 0.5)
    assert moved.params.M0 == 0.5 and moved.params.M1 < 0.5
    with pytest.raises(ValueError):
        cfg.with_value("name", 3)


def test_homogeneous_demo_end_to_end(tmp_path, capsys):
    assert main(["demo", "homogeneous_logistic", "--out", str(tmp_path / "h"), "--strict"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["status"] == "ReachedT" and summary["ledger_pass"]
    assert summary["ledger"]["logistic_ode"]["failed"] == 0
