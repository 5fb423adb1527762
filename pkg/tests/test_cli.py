import json

import pytest

from rdwaves.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


@pytest.fixture()
def fisher_cfg(tmp_path):
    assert run(tmp_path / "cfg", "example", "fisher") == 0
    return str(tmp_path / "cfg" / "fisher.json")


def test_example_writes_config(tmp_path, capsys):
    assert run(tmp_path, "example", "limited") == 0
    out = capsys.readouterr().out.strip()
    assert out.endswith("limited.json")
    cfg = json.loads((tmp_path / "limited.json").read_text())
    assert cfg["flux"]["kind"] == "limited"
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "limited.json" in manifest["outputs"]


def test_speeds_fisher(tmp_path, capsys, fisher_cfg):
    code = run(tmp_path, "speeds", "--model", fisher_cfg, "--tol", "1e-5")
    assert code == 0
    line = capsys.readouterr().out
    assert "sigma_s=2.0000" in line
    data = json.loads((tmp_path / "speeds.json").read_text())
    assert data["sigma_s"] == pytest.approx(2.0, abs=1e-3)
    assert data["sigma_r"] == pytest.approx(2.0, abs=1e-3)
    assert data["lower_bound"] == pytest.approx(2.0, rel=1e-9)
    assert data["bracket_history"], "audit trail must be kept"


def test_speeds_flags_gap(tmp_path, capsys):
    assert run(tmp_path / "cfg", "example", "band-lifted-small") == 0
    code = run(tmp_path, "speeds", "--model",
               str(tmp_path / "cfg" / "band-lifted-small.json"),
               "--lambda", "0.01", "--tol", "1e-4")
    assert code == 0
    out = capsys.readouterr().out
    assert "sigma_s < sigma_r" in out


def test_profile_classic(tmp_path, fisher_cfg):
    code = run(tmp_path, "profile", "--model", fisher_cfg,
               "--sigma", "2.5", "--tol", "1e-4", "--points", "501")
    assert code == 0
    checks = json.loads((tmp_path / "checks.json").read_text())
    assert checks["kind"] == "classic"
    assert checks["n_jumps"] == 0
    lines = (tmp_path / "jumps.csv").read_text().splitlines()
    assert lines == ["xi_k,mu,nu,rh_residual,bdp_margin"]
    prof = (tmp_path / "profile.csv").read_text().splitlines()
    assert prof[0] == "xi,u,is_jump"
    assert len(prof) == 502


def test_profile_below_threshold(tmp_path, capsys, fisher_cfg):
    code = run(tmp_path, "profile", "--model", fisher_cfg,
               "--sigma", "1.0", "--tol", "1e-4")
    assert code == 5
    err = capsys.readouterr().err
    assert "below the singular threshold" in err
    assert not (tmp_path / "profile.csv").exists()


def test_missing_model_exits_2(tmp_path, capsys):
    assert run(tmp_path, "speeds", "--model", "nowhere.json") == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"flux": {"kind": "warp"}, "reaction": {"kind": "logistic"}}')
    assert run(tmp_path, "speeds", "--model", str(bad)) == 2


def test_sweep(tmp_path, capsys):
    assert run(tmp_path / "cfg", "example", "limited") == 0
    cfg = str(tmp_path / "cfg" / "limited.json")
    code = run(tmp_path, "sweep", "--model", cfg, "--eps", "0.2,0.1",
               "--tol", "1e-4")
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0] == "eps,sigma_eps,monotone"
    eps, sig, mono = rows[1].split(",")
    assert float(eps) == pytest.approx(0.2)
    assert "e" in sig, "twelve-digit scientific format"
    assert mono == "1"
    assert len(rows) == 3


def test_sweep_empty_eps_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "sweep", "--model", "x.json", "--eps", "")
    assert exc.value.code == 2


def test_profile_relocates_anchor_off_jump(tmp_path, capsys):
    assert run(tmp_path / "cfg", "example", "band") == 0
    code = run(tmp_path, "profile", "--model",
               str(tmp_path / "cfg" / "band.json"), "--sigma", "0.3487")
    assert code == 0
    err = capsys.readouterr().err
    assert "sits on a jump" in err
    checks = json.loads((tmp_path / "checks.json").read_text())
    assert checks["n_jumps"] == 1
    assert checks["rh_ok"] and checks["bdp_ok"]
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    moved = manifest["extras"]["anchor"]
    assert moved["requested"] == pytest.approx(0.5)
    assert not 0.22 <= moved["used"] <= 0.92


def test_leaked_package_error_exits_cleanly(tmp_path, fisher_cfg, capsys,
                                            monkeypatch):
    from rdwaves import cli as climod
    from rdwaves.errors import InsufficientWindow

    def boom(traj, **kwargs):
        raise InsufficientWindow("only 3 usable samples")

    monkeypatch.setattr(climod, "measure_speed", boom)
    code = run(tmp_path, "validate", "--model", fisher_cfg,
               "--grid-h", "0.2", "--grid-L", "20", "--grid-T", "2")
    assert code == 2
    assert "usable samples" in capsys.readouterr().err


def test_validate_saturating_flux_exits_3(tmp_path, capsys):
    assert run(tmp_path / "cfg", "example", "limited") == 0
    code = run(tmp_path, "validate", "--model",
               str(tmp_path / "cfg" / "limited.json"),
               "--grid-h", "0.2", "--grid-L", "20", "--grid-T", "4")
    assert code == 3
    assert "hypothesis violation" in capsys.readouterr().err


def test_validate_writes_comparison(tmp_path, fisher_cfg):
    code = run(tmp_path, "validate", "--model", fisher_cfg, "--tol", "1e-4",
               "--grid-h", "0.1", "--grid-L", "100", "--grid-T", "30")
    assert code == 0
    data = json.loads((tmp_path / "validate.json").read_text())
    assert data["sigma_s"] == pytest.approx(2.0, abs=1e-3)
    assert data["pde_speed"] == pytest.approx(2.0, rel=0.08)
    assert (tmp_path / "trajectory.csv").exists()


def test_runs_are_deterministic(tmp_path, fisher_cfg):
    for sub in ("a", "b"):
        assert run(tmp_path / sub, "profile", "--model", fisher_cfg,
                   "--sigma", "2.5", "--tol", "1e-4", "--points", "301") == 0
    for name in ("profile.csv", "jumps.csv", "checks.json"):
        assert ((tmp_path / "a" / name).read_bytes()
                == (tmp_path / "b" / name).read_bytes())
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    ma.pop("wall_time_s"), mb.pop("wall_time_s")
    ma["args"].pop("out"), mb["args"].pop("out")
    assert ma == mb


def test_manifest_lists_every_artifact(tmp_path, fisher_cfg):
    assert run(tmp_path, "speeds", "--model", fisher_cfg, "--tol", "1e-4") == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    written = {p.name for p in tmp_path.iterdir()
               if p.is_file()} - {"manifest.json"}
    assert set(manifest["outputs"]) == written
    assert manifest["command"] == "speeds"
    assert manifest["config"]["flux"]["kind"] == "linear"
