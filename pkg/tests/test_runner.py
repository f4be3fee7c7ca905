import json
import math
from pathlib import Path

import numpy as np
import pytest

from radperc import cli, runner


def run_cli(args):
    return cli.main([str(a) for a in args])


def test_config_file_parsing(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        "# comment line\n"
        "mode = dp\n"
        "N = 32\n"
        "p = 0.1, 0.2\n"
        "q = inf\n"
        "n_traj = 50\n"
        "output_dir = out\n")
    values = runner.parse_config_file(cfg_file)
    assert values["N"] == 32
    assert values["p"] == (0.1, 0.2)
    assert values["q"] == math.inf
    cfg = runner.build_config(values, {"n_traj": 80})
    assert cfg.n_traj == 80  # flag wins over file


def test_config_file_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("unknown_key = 3\n")
    with pytest.raises(runner.ConfigError, match="bad.cfg:1"):
        runner.parse_config_file(bad)
    bad.write_text("just words\n")
    with pytest.raises(runner.ConfigError, match="key=value"):
        runner.parse_config_file(bad)


def test_validation_errors():
    with pytest.raises(runner.ConfigError):
        runner.build_config({}, {"mode": "dp", "N": 31})
    with pytest.raises(runner.ConfigError):
        runner.build_config({}, {"mode": "dp", "p": (1.5,)})
    with pytest.raises(runner.ConfigError):
        runner.build_config({}, {"mode": "warp"})
    with pytest.raises(runner.ConfigError):
        runner.build_config({}, {"mode": "decode", "case": "iii"})
    with pytest.raises(runner.ConfigError):
        runner.build_config({}, {"mode": "otoc", "q": 3.0})


def test_init_spec_parsing():
    from radperc import dp

    assert runner.parse_init("single:3", 8) == dp.SingleSite(3)
    assert runner.parse_init("block:2:5", 8) == dp.Block(2, 5)
    assert runner.parse_init("custom:0101", 4) == dp.Custom((0, 1, 0, 1))
    with pytest.raises(runner.ConfigError):
        runner.parse_init("ring:3", 8)


def test_dp_mode_outputs_and_determinism(tmp_path):
    base = {"mode": "dp", "N": 16, "depth": 8, "p": (0.3,), "n_traj": 64,
            "seed": 7, "batch": 16}
    out1 = runner.run(runner.build_config(base, {"output_dir": str(tmp_path / "a")}))
    out2 = runner.run(runner.build_config(base, {"output_dir": str(tmp_path / "b"),
                                                 "workers": 2}))
    for name in ("curves.csv", "curves_extra.csv", "otoc.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
    header = (out1 / "curves.csv").read_text().splitlines()[0]
    assert header == "t,rho,rho_sem,P,P_sem,R2,R2_sem,front,front_sem"
    assert (out1 / "otoc.csv").read_text().splitlines()[0] == "t,x,C_mean,C_sem"


def test_manifest_checksums(tmp_path):
    import hashlib

    cfg = runner.build_config({}, {"mode": "dp", "N": 8, "depth": 4,
                                   "p": (0.2,), "n_traj": 16,
                                   "output_dir": str(tmp_path)})
    out = runner.run(cfg)
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["seed"] == 0
    for rel, digest in manifest["checksums"].items():
        got = hashlib.sha256((out / rel).read_bytes()).hexdigest()
        assert got == digest


def test_meanfield_mode_row(tmp_path):
    code = run_cli(["meanfield", "--q", "2", "--p", "0", "--out", tmp_path / "mf"])
    assert code == 0
    lines = (tmp_path / "mf" / "meanfield.csv").read_text().splitlines()
    assert lines[0] == "q,p,rho_e,rho_v,P_r,P_l,P_d,v_B,p_c_mf"
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(row["v_B"]) == pytest.approx(0.6, abs=1e-12)


def test_grid_layout_and_info_mode(tmp_path):
    cfg = runner.build_config({}, {"mode": "dp", "N": 16, "depth": 8,
                                   "p": (0.1, 0.3), "n_traj": 32,
                                   "output_dir": str(tmp_path / "grid")})
    out = runner.run(cfg)
    assert (out / "p=0.10000" / "curves.csv").exists()
    assert (out / "p=0.30000" / "curves.csv").exists()

    cfg = runner.build_config({}, {"mode": "decode", "N": 8, "depth": 6,
                                   "k": 1, "case": "i", "p": (0.2,),
                                   "n_traj": 40, "record_every": 1,
                                   "output_dir": str(tmp_path / "dec")})
    out = runner.run(cfg)
    lines = (out / "info.csv").read_text().splitlines()
    assert lines[0] == "p,t,Ic_E_mean,Ic_E_sem,Ic_S_mean,Ic_S_sem,F_mean,F_sem"
    first = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert float(first["F_mean"]) == pytest.approx(0.25)  # t=0, k=1
    assert float(first["Ic_E_mean"]) == pytest.approx(-1.0)


def test_fit_and_collapse_modes(tmp_path):
    grid_dir = tmp_path / "family"
    cfg = runner.build_config({}, {"mode": "dp", "N": 32, "depth": 64,
                                   "p": (0.15, 0.2, 0.25, 0.3), "n_traj": 400,
                                   "seed": 3, "output_dir": str(grid_dir)})
    runner.run(cfg)
    fit_cfg = runner.build_config({}, {"mode": "fit", "input_dir": str(grid_dir),
                                       "output_dir": str(tmp_path / "fits"),
                                       "window_lo": 4, "window_hi": 16})
    out = runner.run(fit_cfg)
    lines = (out / "fit.csv").read_text().splitlines()
    assert lines[0] == "observable,window_lo,window_hi,exponent,amplitude,goodness,p_c"
    row = lines[1].split(",")
    assert row[0] == "rho_curvature"
    assert 0.15 <= float(row[6]) <= 0.3

    single_fit = runner.build_config({}, {"mode": "fit",
                                          "input_dir": str(grid_dir / "p=0.20000"),
                                          "output_dir": str(tmp_path / "fit1"),
                                          "window_lo": 4, "window_hi": 16})
    out = runner.run(single_fit)
    names = [l.split(",")[0] for l in (out / "fit.csv").read_text().splitlines()[1:]]
    assert names == ["rho", "P", "R2"]

    col_cfg = runner.build_config({}, {"mode": "collapse", "input_dir": str(grid_dir),
                                       "output_dir": str(tmp_path / "col"),
                                       "p_c": 0.206, "window_lo": 4,
                                       "window_hi": 16})
    out = runner.run(col_cfg)
    lines = (out / "collapse.csv").read_text().splitlines()
    assert lines[0] == "observable,branch,p,t,x_scaled,y_scaled,y_sem_scaled"
    branches = {l.split(",")[1] for l in lines[1:]}
    assert {"below", "above"} <= branches
    assert "critical" in branches  # OTOC profile slices found otoc.csv


def test_cli_exit_codes(tmp_path):
    assert run_cli(["dp", "--N", 15, "--p", "0.1", "--out", tmp_path / "x"]) == 2
    assert run_cli(["dp", "--config", tmp_path / "missing.cfg",
                    "--out", tmp_path / "y"]) == 3
    assert run_cli(["fit", "--input", tmp_path / "nowhere",
                    "--out", tmp_path / "z"]) == 2


def test_info_mode_crossing_shape(tmp_path):
    # late-time coherent information grows with p across the transition
    cfg = runner.build_config({}, {"mode": "info", "N": 8, "depth": 40, "k": 8,
                                   "case": "i", "p": (0.1, 0.45), "n_traj": 100,
                                   "seed": 5, "output_dir": str(tmp_path)})
    out = runner.run(cfg)
    lines = (out / "info.csv").read_text().splitlines()[1:]
    late = {}
    for line in lines:
        p, t, ic_e = (float(v) for v in line.split(",")[:3])
        late[p] = max(late.get(p, (0, 0)), (t, ic_e))
    assert late[0.45][1] == 8.0       # above p_c: saturates at k
    assert late[0.1][1] < late[0.45][1]


def test_workers_env_default(monkeypatch):
    cfg = runner.build_config({}, {"mode": "dp", "N": 8, "p": (0.1,)})
    monkeypatch.setenv("RADPERC_WORKERS", "5")
    assert cfg.effective_workers() == 5
    monkeypatch.delenv("RADPERC_WORKERS")
    assert cfg.effective_workers() == 1
    cfg2 = runner.build_config({}, {"mode": "dp", "N": 8, "p": (0.1,),
                                    "workers": 2})
    assert cfg2.effective_workers() == 2


def test_float_serialization_roundtrip():
    vals = [1 / 3, 2 / 3, 1e-17, 123456.789]
    for v in vals:
        assert float(runner.fmt(v)) == v
