"""Config parsing and the command-line surface, including exit codes and
output reproducibility."""

import json
from pathlib import Path

import numpy as np
import pytest

from sirslab.cli import main
from sirslab.config import (ConfigError, config_digest, load_ensemble_config,
                            load_sim_config)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
DISEASE_FREE_CFG = str(CONFIG_DIR / "disease_free.cfg")
ENDEMIC_CFG = str(CONFIG_DIR / "endemic.cfg")


def write_cfg(tmp_path, body, name="run.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


MINIMAL = """\
[model]
lambda = 0.05
mu = 0.05
beta = 0.08
gamma = 0.035
delta = 0.005
eta = 0.002
sigma = 0.05
tau = 10

[simulation]
dt = 0.1
t_end = 20

[ensemble]
n_paths = 4
base_seed = 7
probe_times = 10,20
"""


def test_load_shipped_configs():
    sim = load_sim_config(DISEASE_FREE_CFG)
    assert sim.params.beta == 0.08
    assert sim.dt == 0.1 and sim.t_end == 300.0
    assert sim.initial_history == (0.7, 0.3, 0.0)
    ens = load_ensemble_config(ENDEMIC_CFG, load_sim_config(ENDEMIC_CFG))
    assert ens.n_paths == 10_000
    assert ens.probe_times == (160.0, 180.0, 200.0)


def test_missing_field_named(tmp_path):
    body = MINIMAL.replace("mu = 0.05\n", "")
    with pytest.raises(ConfigError, match="mu"):
        load_sim_config(write_cfg(tmp_path, body))


def test_missing_file():
    with pytest.raises(ConfigError):
        load_sim_config("/nonexistent/run.cfg")


def test_cli_overrides(tmp_path):
    cfg = write_cfg(tmp_path, MINIMAL)
    sim = load_sim_config(cfg, dt=0.05, t_end=10.0, clamp_policy="fail",
                          record_stride=2)
    assert sim.dt == 0.05 and sim.t_end == 10.0
    assert sim.clamp_policy == "fail" and sim.record_stride == 2


def test_config_digest_ignores_formatting(tmp_path):
    a = write_cfg(tmp_path, MINIMAL, "a.cfg")
    shuffled = MINIMAL.replace("mu = 0.05", "mu =   0.05  # comment")
    b = write_cfg(tmp_path, shuffled, "b.cfg")
    c = write_cfg(tmp_path, MINIMAL.replace("0.08", "0.09"), "c.cfg")
    assert config_digest(a) == config_digest(b)
    assert config_digest(a) != config_digest(c)


def test_check_disease_free(capsys):
    code = main(["check", DISEASE_FREE_CFG])
    out = capsys.readouterr().out
    assert code == 0
    assert "R0 = 0.888889" in out
    assert "requested regime: disease-free -> PASS" in out
    assert "bound = 8.67086" in out


def test_check_endemic(capsys):
    code = main(["check", ENDEMIC_CFG])
    out = capsys.readouterr().out
    assert code == 0
    assert "R0 = 2.22222" in out
    assert "excess mu*S*-eta*R* = 0.0220824" in out
    assert "requested regime: ergodic -> PASS" in out


def test_check_wrong_regime_fails(capsys):
    assert main(["check", ENDEMIC_CFG, "--regime", "disease-free"]) == 1


def test_check_bad_config(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL.replace("mu = 0.05", "mu = oops"))
    assert main(["check", cfg]) == 2


def test_simulate_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    cfg = write_cfg(tmp_path, MINIMAL)
    assert main(["simulate", cfg, "--seed", "3", "--out", str(out)]) == 0
    for name in ("path.csv", "deterministic.csv", "path.svg", "manifest.json"):
        assert (out / name).is_file()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    assert manifest["config_digest"] == config_digest(cfg)
    header = (out / "path.csv").read_text().splitlines()[0]
    assert header == "t,S,I,R"


def test_simulate_seed_reproducible(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["simulate", cfg, "--seed", "5", "--out", str(a)])
    main(["simulate", cfg, "--seed", "5", "--out", str(b)])
    assert (a / "path.csv").read_bytes() == (b / "path.csv").read_bytes()
    c = tmp_path / "c"
    main(["simulate", cfg, "--seed", "6", "--out", str(c)])
    assert (a / "path.csv").read_bytes() != (c / "path.csv").read_bytes()


def test_simulate_sigma_zero_curves_coincide(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL.replace("sigma = 0.05", "sigma = 0"))
    out = tmp_path / "det"
    main(["simulate", cfg, "--out", str(out)])
    assert (out / "path.csv").read_bytes() == \
        (out / "deterministic.csv").read_bytes()


def test_ensemble_outputs_and_summary(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL)
    out = tmp_path / "ens"
    code = main(["ensemble", cfg, "--paths", "32", "--out", str(out)])
    assert code == 0
    doc = json.loads((out / "summary.json").read_text())
    assert doc["n_paths"] == 32
    assert len(doc["mean"]) == len(doc["times"])
    assert all(v >= 0.0 for row in doc["variance"] for v in row)
    probes = np.loadtxt(out / "probe_t10.csv", delimiter=",", skiprows=1)
    assert probes.shape == (32, 3)
    assert set(doc["ks_distances"]) == {
        f"{c}:t10-t20" for c in "SIR"}
    # disease-free regime: the summary carries the bound comparison
    assert doc["bound_check"]["pass"] is True
    assert (out / "density_S_t10.csv").is_file()
    assert (out / "density_I.svg").is_file()


def test_ensemble_single_path_degenerate(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL.replace("sigma = 0.05", "sigma = 0"))
    out = tmp_path / "one"
    # with sigma = 0 the transient average exceeds the (zero) noise bound,
    # so the run completes but the bound verdict is FAIL
    code = main(["ensemble", cfg, "--paths", "2", "--out", str(out)])
    assert code == 1
    assert "degenerate" in capsys.readouterr().out
    doc = json.loads((out / "summary.json").read_text())
    assert doc["bound_check"]["bound"] == 0.0


def test_ensemble_worker_independence(tmp_path, capsys):
    cfg = write_cfg(tmp_path, MINIMAL)
    a, b = tmp_path / "j1", tmp_path / "j3"
    main(["ensemble", cfg, "--paths", "24", "--jobs", "1", "--out", str(a)])
    main(["ensemble", cfg, "--paths", "24", "--jobs", "3", "--out", str(b)])
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    assert (a / "probe_t20.csv").read_bytes() == (b / "probe_t20.csv").read_bytes()


def test_ensemble_runtime_failure_exit(tmp_path, capsys):
    body = MINIMAL.replace("sigma = 0.05", "sigma = 3.0")
    body = body.replace("[simulation]\n", "[simulation]\nclamp_policy = fail\n")
    cfg = write_cfg(tmp_path, body)
    out = tmp_path / "boom"
    assert main(["ensemble", cfg, "--paths", "4", "--out", str(out)]) == 3
