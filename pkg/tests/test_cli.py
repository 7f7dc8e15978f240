import json
import subprocess
import sys

import numpy as np
import pytest

from hankelfp.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from hankelfp.estimation import ExpModel, add_noise, synthesize, zeta_to_cycles
from hankelfp.experiments import preset_config, wave_curve
from hankelfp.io import load_signal, read_table, save_signal


@pytest.fixture
def signal_1d(tmp_path):
    x = np.linspace(0.0, 1.0, 41)
    model = ExpModel(np.array([1.0, 0.6 - 0.3j]), np.array([-0.5 + 20j, 0.2 - 35j]))
    path = tmp_path / "sig.csv"
    save_signal(path, x, synthesize(model, x))
    return path, model


def test_denoise(tmp_path, signal_1d, capsys):
    path, model = signal_1d
    out = tmp_path / "out"
    assert main(["denoise", str(path), "--out", str(out), "--rank", "2"]) == EXIT_OK
    assert "converged=True" in capsys.readouterr().out
    x, a = load_signal(out / "denoised.csv")
    _, f = load_signal(path)
    np.testing.assert_allclose(a, f, atol=1e-8)
    est = ExpModel.from_json(out / "model.json")
    np.testing.assert_allclose(np.sort_complex(est.zetas[:, 0]), np.sort_complex(model.zetas[:, 0]), atol=1e-6)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rank"] == 2 and summary["converged"]


def test_denoise_cycles_and_tau(tmp_path, signal_1d):
    path, model = signal_1d
    out = tmp_path / "out"
    assert main(["denoise", str(path), "--out", str(out), "--tau", "0.5", "--q", "3", "--units", "cycles"]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["final_tau"] == 0.5 and summary["convexity"] is None
    terms = json.loads((out / "model.json").read_text())
    nu = np.array([t["re_zeta"][0] + 1j * t["im_zeta"][0] for t in terms])
    assert np.all(np.abs(nu) < 10)  # cycles, not radians
    np.testing.assert_allclose(np.sort(nu.real), np.sort(zeta_to_cycles(model.zetas[:, 0]).real), atol=0.5)


def test_denoise_rejects_uneven_points(tmp_path):
    path = tmp_path / "s.csv"
    save_signal(path, np.array([0.0, 0.1, 0.3, 0.4]), np.ones(4))
    assert main(["denoise", str(path), "--out", str(tmp_path / "o"), "--rank", "1"]) == EXIT_IO


def test_denoise_needs_rank_or_tau(tmp_path, signal_1d, capsys):
    path, _ = signal_1d
    assert main(["denoise", str(path), "--out", str(tmp_path / "o")]) == EXIT_CONFIG
    assert "--rank" in capsys.readouterr().err


def test_bad_parameter_is_config_error(tmp_path, signal_1d):
    path, _ = signal_1d
    assert main(["denoise", str(path), "--out", str(tmp_path / "o"), "--rank", "2", "--q", "0.5"]) == EXIT_CONFIG


def test_missing_input_is_io_error(tmp_path, capsys):
    assert main(["denoise", str(tmp_path / "none.csv"), "--out", str(tmp_path / "o"), "--rank", "1"]) == EXIT_IO
    assert "I/O error" in capsys.readouterr().err


def test_malformed_input_cites_line(tmp_path, capsys):
    path = tmp_path / "s.csv"
    path.write_text("x_1,re,im\n0,1,0\n0.5,1,0\n1,zz,0\n")
    assert main(["denoise", str(path), "--out", str(tmp_path / "o"), "--rank", "1"]) == EXIT_IO
    assert ":4:" in capsys.readouterr().err


def test_usage_error_exits_with_config_code():
    with pytest.raises(SystemExit) as info:
        main(["denoise"])
    assert info.value.code == EXIT_CONFIG


def test_fit_2d_curve(tmp_path):
    nu = np.array([[2.5 + 0.06j, -1.5 - 0.05j], [-3.1 - 0.03j, 2.2 + 0.04j]])
    model = ExpModel(np.array([1.0, 0.8 - 0.6j]), 2j * np.pi * nu)
    X = wave_curve(600)
    path = tmp_path / "curve.csv"
    save_signal(path, X, synthesize(model, X))
    out = tmp_path / "fit"
    argv = ["fit", str(path), "--out", str(out), "--spacing", str(1 / 64), "--xi", "8", "--rank", "2", "--units", "cycles"]
    assert main(argv) == EXIT_OK
    terms = json.loads((out / "model.json").read_text())
    est = np.array([np.array(t["re_zeta"]) + 1j * np.array(t["im_zeta"]) for t in terms])
    est = est[np.argsort(est[:, 0].real)]
    truth = nu[np.argsort(nu[:, 0].real)]
    np.testing.assert_allclose(est, truth, atol=1e-4)
    pts, rec = load_signal(out / "reconstruction.csv")
    np.testing.assert_allclose(rec, synthesize(model, X), atol=1e-5)


def test_fit_validates_xi(tmp_path, signal_1d):
    path, _ = signal_1d
    base = ["fit", str(path), "--out", str(tmp_path / "o"), "--spacing", "0.025", "--rank", "2"]
    assert main(base + ["--xi", "1"]) == EXIT_CONFIG
    assert main(base + ["--xi", "4", "4"]) == EXIT_CONFIG
    assert main(["fit", str(path), "--out", str(tmp_path / "o"), "--spacing", "0.025", "--tau", "1"]) == EXIT_CONFIG


def test_experiment_preset_dump(capsys):
    assert main(["experiment", "preset", "missing-data", "--dump"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out) == preset_config("missing-data")


def test_experiment_preset_needs_output():
    assert main(["experiment", "preset", "weighted", "--trials", "1"]) == EXIT_CONFIG


def test_experiment_preset_run(tmp_path, capsys):
    out = tmp_path / "w"
    argv = ["experiment", "preset", "weighted", "--out", str(out), "--trials", "2", "--seed", "10", "--max-iter", "30", "--no-plot"]
    assert main(argv) == EXIT_OK
    text = capsys.readouterr().out
    assert "trial    0" in text and "report written" in text
    rows = read_table(out / "report.csv")
    assert [r["seed"] for r in rows] == ["10", "11"]
    assert not (out / "figures").exists()
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["solver"]["max_iter"] == 30


def test_experiment_run_config(tmp_path):
    x = np.linspace(-0.5, 0.5, 33)
    model = ExpModel(np.array([1.0]), np.array([6j]))
    save_signal(tmp_path / "d.csv", x, add_noise(synthesize(model, x), 30.0, 1))
    cfg = {
        "experiment": "weighted",
        "data": "d.csv",
        "solver": {"K": 1, "rel_tol": 1e-8},
        "weights": {"kind": "uniform"},
        "output": "res",
        "plot": False,
    }
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert main(["experiment", "run", str(tmp_path / "c.json")]) == EXIT_OK
    est = json.loads((tmp_path / "res" / "estimates.json").read_text())
    z = est["trials"][0]["terms"][0]["im_zeta"][0]
    assert abs(z - 6.0) < 0.1


def test_experiment_run_bad_config(tmp_path, capsys):
    (tmp_path / "c.json").write_text(json.dumps({"experiment": "weighted", "model": [], "output": "x"}))
    assert main(["experiment", "run", str(tmp_path / "c.json")]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and "model" in err


def test_experiment_run_unparsable_config(tmp_path):
    (tmp_path / "c.json").write_text("{ not json")
    assert main(["experiment", "run", str(tmp_path / "c.json"), "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hankelfp", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "hankelfp" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "hankelfp", "experiment", "preset", "bogus"], capture_output=True, text=True)
    assert proc.returncode == EXIT_CONFIG
