import subprocess
import sys

import pytest

from slnet.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, ConfigError, load_config, main

RING_CFG = """
seed = 0
[topology]
kind = "ring"
n = 6
s = 2
[params]
mu = 1.0
omega = 1.0
c = 0.02
[initial]
mode = "polar"
r = 0.5
theta_range = [0.3, 2.8]
[run]
t_end = 200.0
sample_every = 0.01
"""

K3_CFG = """
[topology]
kind = "complete"
n = 3
[params]
mu = 1.0
omega = 0.0
c = 0.01
[initial]
r = 0.5
theta_range = [0.2, 1.3]
[run]
t_end = 50.0
"""


@pytest.fixture
def cfg_file(tmp_path):
    def write(text, name="cfg.toml"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_simulate_half_circle_scenario(cfg_file, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--config", cfg_file(RING_CFG), "--out", str(out)]) == EXIT_OK
    report = (out / "sync_report.txt").read_text()
    assert "frequency_amplitude_sync = true" in report
    assert "complete_sync = true" in report
    assert (out / "trajectory.csv").read_text().startswith("t,x_1,y_1,")


def test_simulate_decayed(cfg_file, tmp_path, capsys):
    rc = main(["simulate", "--config", cfg_file(RING_CFG), "--out", str(tmp_path / "d"),
               "--set", "params.mu=-1.0", "--set", "params.c=0", "--set", "run.t_end=30"])
    assert rc == EXIT_OK
    assert 'classification = "decayed"' in capsys.readouterr().out


def test_bit_reproducible(cfg_file, tmp_path):
    args = ["simulate", "--config", cfg_file(K3_CFG), "--seed", "7", "--set", "run.t_end=5"]
    main(args + ["--out", str(tmp_path / "a")])
    main(args + ["--out", str(tmp_path / "b")])
    for name in ("trajectory.csv", "metrics.csv", "sync_report.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    main(["simulate", "--config", cfg_file(K3_CFG), "--seed", "8", "--set", "run.t_end=5", "--out", str(tmp_path / "c")])
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() != (tmp_path / "c" / "trajectory.csv").read_bytes()


@pytest.mark.parametrize("text", [
    "[params\nmu = 1",                          # TOML syntax
    "[params]\nmu = 1.0\nbogus = 2\n",          # unknown key
    "[nonsense]\nx = 1\n",                      # unknown section
    '[topology]\nkind = "star"\nn = 4\n[params]\nmu = 1.0\n',
    "[topology]\nn = 6\ns = 4\n[params]\nmu = 1.0\n",   # s out of range
    "[topology]\nn = 6\n",                      # mu missing
])
def test_malformed_config_exits_2(cfg_file, tmp_path, text, capsys):
    assert main(["simulate", "--config", cfg_file(text), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["simulate", "--config", str(tmp_path / "nope.toml")]) == EXIT_CONFIG


def test_bad_subcommand():
    assert main(["frobnicate"]) == EXIT_CONFIG


def test_divergence_exits_3(cfg_file, tmp_path, capsys):
    rc = main(["simulate", "--config", cfg_file(K3_CFG), "--out", str(tmp_path),
               "--set", "initial.r=1e100", "--set", "integrator.dt=0.1", "--set", "run.t_end=20"])
    assert rc == EXIT_RUNTIME
    assert "runtime error" in capsys.readouterr().err


def test_certify_examples(cfg_file, tmp_path, capsys):
    path = cfg_file(K3_CFG)
    assert main(["certify", "--config", path, "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "[AntiDeath]\nsatisfied = true" in text
    main(["certify", "--config", path, "--out", str(tmp_path), "--set", "params.c=0.2"])
    text = capsys.readouterr().out
    assert "[AntiDeath]\nsatisfied = false" in text
    assert "clause i: c < c_star" in text and "VIOLATED" in text
    assert "[QuarterCircleSync]\nsatisfied = true" in text
    main(["certify", "--config", path, "--out", str(tmp_path), "--set", "params.omega=[1.0, 1.0, 1.5]"])
    text = capsys.readouterr().out
    assert "[HalfCircleSync]\nsatisfied = false" in text
    assert "clause identical_omega" in text


def test_certify_validate(cfg_file, tmp_path, capsys):
    rc = main(["certify", "--config", cfg_file(K3_CFG), "--out", str(tmp_path), "--validate",
               "--set", "params.c=0.1", "--set", "run.t_end=200"])
    assert rc == EXIT_OK
    text = (tmp_path / "certificates.txt").read_text()
    assert "[Validation]" in text and 'classification = "synchronous"' in text


def test_critical_values(tmp_path, capsys):
    assert main(["critical-values", "-N", "6", "-s", "2", "-c", "0.05", "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "mu_2=mu_4=mu_6 = 0.2: modes 2, 4, 6" in text
    assert "mu_3=mu_5 = 0.3: modes 3, 5" in text
    assert (tmp_path / "markers.csv").exists()
    main(["critical-values", "-N", "7", "-s", "3", "-c", "0.05"])
    text = capsys.readouterr().out
    assert "= 0.35: modes 2, 3, 4, 5, 6, 7" in text and "highly degenerate" in text
    assert main(["critical-values", "-N", "6", "-s", "5", "-c", "0.05"]) == EXIT_CONFIG


def test_hopf(capsys):
    assert main(["hopf", "--omega", "1.0"]) == EXIT_OK
    text = capsys.readouterr().out
    for line in ("p2              = 1", "zeta2           = -2", "T2              = 0"):
        assert line in text
    assert main(["hopf", "--omega", "0"]) == EXIT_CONFIG


def test_spectrum(cfg_file, tmp_path, capsys):
    rc = main(["spectrum", "--config", cfg_file(RING_CFG), "--out", str(tmp_path), "--set", "params.c=0.05"])
    assert rc == EXIT_OK
    rows = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "j,mu_j,pair_partner,degeneracy_class,simple"
    assert len(rows) == 7


def test_scan(cfg_file, tmp_path, capsys):
    rc = main(["scan", "--config", cfg_file(RING_CFG), "--out", str(tmp_path),
               "--set", "params.c=0.05", "--set", "scan.mu_grid=[-0.02, 0.04, 0.09, 0.16]"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "onset estimate" in out
    assert (tmp_path / "scan.csv").exists() and (tmp_path / "markers.csv").exists()


def test_override_parsing():
    cfg = load_config(None, ["params.mu=0.5", "integrator.scheme=rkf45", "seed=3"])
    assert cfg["params"]["mu"] == 0.5 and cfg["integrator"]["scheme"] == "rkf45" and cfg["seed"] == 3
    with pytest.raises(ConfigError):
        load_config(None, ["params.mu"])
    with pytest.raises(ConfigError):
        load_config(None, ["a.b.c=1"])
    with pytest.raises(ConfigError):
        load_config(None, [], seed=-1)


def test_rkf45_and_explicit_initial(cfg_file, tmp_path, capsys):
    rc = main(["simulate", "--config", cfg_file(K3_CFG), "--out", str(tmp_path),
               "--set", "integrator.scheme=rkf45", "--set", 'initial.mode="explicit"',
               "--set", "initial.re=[0.5, 0.4, 0.3]", "--set", "initial.im=[0.1, 0.2, 0.3]"])
    assert rc == EXIT_OK
    rc = main(["simulate", "--config", cfg_file(K3_CFG), "--out", str(tmp_path),
               "--set", 'initial.mode="explicit"', "--set", "initial.re=[0.5]"])
    assert rc == EXIT_CONFIG


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "slnet", "hopf", "--omega", "2"], capture_output=True, text=True)
    assert res.returncode == 0 and "supercritical" in res.stdout


@pytest.mark.parametrize("name", ["ring_sync", "ring_scan", "triangle"])
def test_shipped_configs_validate(name):
    from pathlib import Path

    from slnet.cli import build_topology

    path = Path(__file__).resolve().parent.parent / "configs" / f"{name}.toml"
    cfg = load_config(str(path))
    assert build_topology(cfg).n_nodes >= 3
