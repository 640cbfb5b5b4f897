import json
import math

import numpy as np
import pytest

from spinbath.cli import main
from spinbath.experiments import emit_weights
from spinbath.propagator import TimeSeries

FAST = [
    "--n-bath", "3", "--j0", "4.0", "--j", "0.4",
    "--realizations", "2", "--t-max", "3.0", "--samples", "121",
]


def test_weights_command(tmp_path):
    out = tmp_path / "weights.csv"
    code = main(["weights", "--n-bath", "5", "--out", str(out)])
    assert code == 0
    assert out.read_text() == emit_weights(5)
    meta = json.loads((tmp_path / "weights.csv.meta.json").read_text())
    assert meta["n_bath"] == 5
    assert meta["version"]


def test_analytic_command(tmp_path):
    out = tmp_path / "curve.csv"
    code = main(["analytic", *FAST, "--out", str(out)])
    assert code == 0
    series = TimeSeries.from_csv(out)
    assert series.values[0] == pytest.approx(1.0)
    assert len(series.times) == 121
    assert series.times[-1] == pytest.approx(3.0)


def test_simulate_command_writes_everything(tmp_path):
    out = tmp_path / "run.csv"
    code = main(["simulate", *FAST, "--seed", "3", "--out", str(out)])
    assert code == 0
    numeric = TimeSeries.from_csv(out)
    analytic = TimeSeries.from_csv(tmp_path / "run_analytic.csv")
    assert numeric.values[0] == pytest.approx(1.0, abs=1e-12)
    assert analytic.values[0] == pytest.approx(1.0)
    meta = json.loads((tmp_path / "run.csv.meta.json").read_text())
    assert meta["seed"] == 3
    assert meta["spec"]["bath_couplings"] == [0.4, 0.4, 0.4]
    assert meta["envelope"]["tail_mean"] > 0.0
    assert meta["grid"]["n_samples"] == 121


def test_simulate_deterministic(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["simulate", *FAST, "--seed", "9", "--out", str(out_a)]) == 0
    assert main(["simulate", *FAST, "--seed", "9", "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_simulate_with_jitter(tmp_path):
    out = tmp_path / "jitter.csv"
    code = main(["simulate", *FAST, "--jitter", "0.3", "--out", str(out)])
    assert code == 0
    meta = json.loads((tmp_path / "jitter.csv.meta.json").read_text())
    assert meta["jitter"] == 0.3
    assert len(meta["drawn_couplings"]) == 3
    assert meta["bath_spin_sq_drift"] > 0.0
    assert not (tmp_path / "jitter_analytic.csv").exists()


def test_parity_command(tmp_path):
    out = tmp_path / "parity.csv"
    code = main(["parity", *FAST, "--out", str(out)])
    assert code == 0
    meta = json.loads((tmp_path / "parity.csv.meta.json").read_text())
    for n in ("1", "2", "3"):
        entry = meta["entries"][n]
        series = TimeSeries.from_csv(entry["csv"])
        assert series.values[0] == pytest.approx(1.0, abs=1e-12)
    assert meta["entries"]["1"]["envelope"] is None
    assert meta["entries"]["2"]["envelope"]["tail_mean"] > 0.0


def test_envelope_command(tmp_path, capsys):
    t = np.linspace(0.0, 20.0, 2001)
    series = TimeSeries(t, np.cos(2.0 * t))
    csv_path = tmp_path / "osc.csv"
    series.write_csv(csv_path)
    code = main(["envelope", str(csv_path), "--period", str(math.pi)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["tail_mean"] == pytest.approx(1.0, abs=1e-3)
    out = tmp_path / "env.json"
    assert main(["envelope", str(csv_path), "--period", str(math.pi), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["tail_mean"] == pytest.approx(1.0, abs=1e-3)


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"n_bath": 2, "seed": 42}))
    out = tmp_path / "run.csv"
    code = main(["simulate", *FAST, "--seed", "1", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    meta = json.loads((tmp_path / "run.csv.meta.json").read_text())
    assert meta["seed"] == 42
    assert len(meta["spec"]["bath_couplings"]) == 2


def test_unknown_config_key_is_config_error(tmp_path):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"n_baths": 2}))
    out = tmp_path / "run.csv"
    assert main(["simulate", *FAST, "--config", str(cfg), "--out", str(out)]) == 2


def test_missing_out_is_config_error():
    assert main(["simulate", *FAST]) == 2


def test_invalid_samples_is_config_error(tmp_path):
    out = tmp_path / "run.csv"
    code = main(["simulate", "--n-bath", "2", "--samples", "1", "--out", str(out)])
    assert code == 2


def test_simulate_rejects_other_central_sizes(tmp_path):
    out = tmp_path / "run.csv"
    code = main(["simulate", *FAST, "--n-central", "3", "--out", str(out)])
    assert code == 2


def test_numerical_failure_exit_code(tmp_path, capsys):
    out = tmp_path / "run.csv"
    code = main([
        "simulate", "--n-bath", "2", "--j0", "4.0", "--j", "0.4",
        "--realizations", "1", "--t-max", "1e5", "--samples", "2",
        "--out", str(out),
    ])
    assert code == 3
    assert "residual" in capsys.readouterr().err


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
