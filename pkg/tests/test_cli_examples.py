import math

import numpy as np

from flexbeam.cli import main
from flexbeam.export import read_csv

from cli_matrix import ini


def run(tmp_path, text, *args):
    cfg = tmp_path / "run.ini"
    cfg.write_text(text)
    out = tmp_path / "out"
    return main([args[0], "--config", str(cfg), "--out", str(out), *args[1:]]), out


def test_validate_echoes_effective_config(tmp_path, capsys):
    code, _ = run(tmp_path, ini(), "validate")
    text = capsys.readouterr().out
    assert code == 0
    assert "root_tol = 1e-12" in text and "valid = true" in text


def test_validate_names_overlap(tmp_path, capsys):
    code, _ = run(tmp_path, ini(actuators=((0.4, 0.1, 1.0, 1.0),)), "validate")
    assert code == 1
    assert "support contains l0" in capsys.readouterr().out


def test_spectrum_midpoint_truncated_roots(tmp_path, capsys):
    code, out = run(tmp_path, ini(l0=0.5), "spectrum")
    assert code == 0
    _, r0 = read_csv(out / "truncated_roots.csv")
    assert np.allclose(r0[:4, 1], [1.5708, 6.2832, 7.8540, 12.5664], atol=5e-5)
    assert "period = 6.283185307179586" in (out / "spectrum.txt").read_text()
    capsys.readouterr()


def test_spectrum_pure_beam_limit(tmp_path, capsys):
    code, out = run(tmp_path, ini(m=1e-12, kappa=1e-12, actuators=()), "spectrum")
    assert code == 0
    header, data = read_csv(out / "spectrum.csv")
    assert header == ["j", "mu_full", "omega", "mu_truncated_nearest", "gap"]
    assert np.allclose(data[:, 1], math.pi * data[:, 0], atol=1e-6)
    capsys.readouterr()


def test_spectrum_empty_range(tmp_path, capsys):
    code, out = run(tmp_path, ini().replace("n_modes = 6\n", "n_modes = 6\nmu_max = 0.5\n"), "spectrum")
    assert code == 0
    _, data = read_csv(out / "spectrum.csv")
    assert data.shape[0] == 0
    assert "notice = no roots below mu_max" in (out / "spectrum.txt").read_text()
    capsys.readouterr()


def summary(path):
    return dict(
        ln.split(" = ", 1) for ln in path.read_text().splitlines() if not ln.startswith("#")
    )


def test_simulate_zero_gains_conserves(tmp_path, capsys):
    code, out = run(tmp_path, ini(alpha0=0.0, actuators=((0.71, 0.17, 1.0, 0.0),)), "simulate")
    assert code == 0
    s = summary(out / "simulation.txt")
    assert abs(float(s["relative_change"])) < 1e-10
    capsys.readouterr()


def test_simulate_certified_decays(tmp_path, capsys):
    code, out = run(tmp_path, ini(), "simulate")
    s = summary(out / "simulation.txt")
    assert float(s["V_end"]) < float(s["V0"])
    assert float(s["max_step_increase"]) <= 1e-10 * float(s["V0"])
    capsys.readouterr()


def test_simulate_zero_initial_state(tmp_path, capsys):
    text = ini().replace("every = 10\n", "every = 10\ninitial = 0, 0, 0\n")
    code, out = run(tmp_path, text, "simulate")
    assert code == 0
    _, data = read_csv(out / "trajectory.csv")
    assert np.all(data[:, 1:] == 0)
    capsys.readouterr()


def test_sweep_actuator_across_node(tmp_path, capsys):
    # near-pure beam, no shaker gain: even modes lose the patch at x = 1/2
    text = ini(l0=0.2, m=1e-12, kappa=1e-12, alpha0=0.0, actuators=((0.45, 0.1, 1.0, 10.0),))
    code, out = run(tmp_path, text, "sweep", "--param", "actuator.1.center",
                    "--from", "0.45", "--to", "0.55", "--steps", "3")
    assert code == 0
    rows = [ln.split(",") for ln in (out / "sweep.csv").read_text().splitlines()[3:]]
    absc = [float(r[1]) for r in rows]
    assert absc[1] > -1e-10 and rows[1][2] == "uncontrollable"
    assert absc[0] < -1e-6 and absc[2] < -1e-6
    capsys.readouterr()


def test_sweep_shaker_gain(tmp_path, capsys):
    code, out = run(tmp_path, ini(actuators=()), "sweep", "--param", "shaker.alpha0",
                    "--from", "0", "--to", "20", "--steps", "5")
    assert code == 0
    rows = [ln.split(",") for ln in (out / "sweep.csv").read_text().splitlines()[3:]]
    absc = [float(r[1]) for r in rows]
    assert abs(absc[0]) < 1e-10
    assert all(a < -1e-6 for a in absc[1:])
    assert [r[0] for r in rows] == sorted((r[0] for r in rows), key=float)
    capsys.readouterr()
