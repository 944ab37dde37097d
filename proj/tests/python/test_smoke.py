import json
import math

import numpy as np
import pytest

import rcsense


def test_scalar_update():
    esn = rcsense.EchoStateNetwork(n_reservoir=20, seed=3)
    assert esn.w.shape == (20, 20)
    assert rcsense.spectral_radius(esn.w) == pytest.approx(0.9, rel=1e-9)
    esn.state = np.zeros(20)
    assert np.all(esn.update_state(np.zeros(1)) == 0.0)


def test_run_and_readout():
    esn = rcsense.EchoStateNetwork(n_reservoir=50, seed=1)
    rng = np.random.default_rng(0)
    u = rng.uniform(-1, 1, size=(300, 1))
    s = esn.run(u, washout=50)
    assert s.shape == (250, 52)
    y = u[50:]  # lag 0 is in the input column
    w = rcsense.train_pinv(s, y)
    assert w.shape == (1, 52)
    assert rcsense.nrmse(s @ w.T, y) < 1e-8
    w2 = rcsense.train_ridge(s, y, 1e-12)
    assert np.max(np.abs(w - w2)) < 1e-4


def test_bad_input_raises():
    esn = rcsense.EchoStateNetwork(n_reservoir=5)
    with pytest.raises(rcsense.InvalidArgument):
        esn.update_state(np.array([math.nan]))
    with pytest.raises(rcsense.InvalidArgument):
        rcsense.virtual_neuron_count(1.0, 0.3)
    assert issubclass(rcsense.OutOfRangeError, rcsense.NumericError)
    assert issubclass(rcsense.NumericError, RuntimeError)


def test_delay_reservoir_parity():
    assert rcsense.virtual_neuron_count(0.05, 0.001) == 50
    mask = rcsense.generate_mask("chaotic", 50, seed=2)
    bits = np.array(rcsense.random_bits(1000, 2))
    states = rcsense.run_delay_reservoir(bits + 0.5, tau=0.05, theta=1e-3, gamma=1.0,
                                         eta=0.8, mask=mask)
    assert states.shape == (1000, 50)
    t = rcsense.parity_targets(bits)[100:]
    x = np.hstack([states[100:], np.ones((900, 1))])
    w = rcsense.train_ridge(x, t.reshape(-1, 1), 1e-8)
    assert rcsense.nrmse(x @ w.T, t.reshape(-1, 1)) < 0.5


def test_analysis():
    n = 10000
    x = 0.7 * np.sin(2 * np.pi * 20 * np.arange(n) / 10e3)
    s = rcsense.packet_spectrum(x, 10e3, 20.0)
    assert s["amplitude"] == pytest.approx(0.7, abs=1e-9)
    assert not s["leakage"]
    t = np.arange(6) * 1.2
    fit = rcsense.fit_decay(t, 2.0 * np.exp(-t / 3.0))
    assert fit["tau_c"] == pytest.approx(3.0, abs=1e-9)
    c = rcsense.infer_concentration([1e-4, 1e-3, 1e-2], [1.0, 3.0, 9.0], 3.0)
    assert c == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(rcsense.OutOfRangeError):
        rcsense.infer_concentration([1e-4, 1e-3], [1.0, 3.0], 10.0)


def test_simulate_memristor():
    a = rcsense.simulate("memristor", 1.0, seed=0)
    b = rcsense.simulate("memristor", 9.0, seed=0)
    assert a["tau_c"] > b["tau_c"] > 0.0
    assert len(a["phi"]) == len(a["xi"]) == len(a["drive"])
    assert a["packet_count"] == len(a["packet_starts"])
    with pytest.raises(rcsense.InvalidArgument):
        rcsense.simulate("photonic", 1.0)


def test_run_experiment(tmp_path):
    cfg = 'scenario = "calibrate"\n[calibrate]\nconcentrations = [1.0, 10.0]\ntau_c = [2.0, 1.0]\n'
    r = rcsense.run_experiment(cfg, tmp_path / "cal")
    assert "calibration.json" in r["files"]
    manifest = json.loads((tmp_path / "cal" / "manifest.json").read_text())
    assert manifest["scenario"] == "calibrate"
    with pytest.raises(rcsense.InvalidArgument):
        rcsense.run_experiment('scenario = "nope"\n', tmp_path / "bad")
