import json
import subprocess
import sys

import numpy as np
import pytest

from qcramer.cli import SweepConfig, UsageError, main
from qcramer.densities import (gaussian_mixture, read_grid_csv, write_grid_csv,
                               write_samples_csv)


def run(*argv):
    return main([str(a) for a in argv])


def test_pdf_compact_peak(tmp_path):
    out = tmp_path / "g.csv"
    assert run("pdf", "--q", 2, "--alpha", 2, "--gamma", 1, "--points", 256, "--out", out) == 0
    d = read_grid_csv(out)
    assert d.xs[0] == -1.0 and d.xs[-1] == 1.0 and len(d.xs) == 256
    # (1 - x^2) * 3/4 sampled at the node closest to the centre
    k = int(np.argmax(d.fs))
    assert d.fs[k] == pytest.approx(0.75 * (1 - d.xs[k] ** 2), rel=1e-12)
    assert d.fs[k] == pytest.approx(0.75, abs=1e-4)


def test_pdf_standard_normal(tmp_path):
    out = tmp_path / "n.csv"
    assert run("pdf", "--q", 1, "--alpha", 2, "--gamma", 0.5, "--out", out) == 0
    d = read_grid_csv(out)
    np.testing.assert_allclose(d.fs, np.exp(-d.xs ** 2 / 2) / np.sqrt(2 * np.pi), rtol=1e-12)


def test_pdf_invalid_parameters(capsys):
    assert run("pdf", "--q", 0.1, "--alpha", 0.5) == 2
    assert "q must exceed 1 - alpha" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    assert run("pdf") == 2
    assert run("frobnicate") == 2
    assert run("check", "--inequality", "corollary3") == 2


def test_check_matched_density_saturates(capsys):
    assert run("check", "--inequality", "corollary3", "--q", 1.5, "--alpha", 3, "--gamma", 2) == 0
    rep = json.loads(capsys.readouterr().out)
    assert len(rep) == 1 and rep[0]["saturated"] is True and rep[0]["gamma"] == 2.0
    assert run("check", "--inequality", "corollary4", "--q", 0.8, "--alpha", 2,
               "--mode", "analytic") == 0
    assert json.loads(capsys.readouterr().out)[0]["saturated"] is True


def test_check_mixture_file(tmp_path, capsys):
    path = tmp_path / "mix.csv"
    write_grid_csv(gaussian_mixture([0.5, 0.5], [-1.5, 1.5], [0.5, 0.5],
                                    np.linspace(-32, 32, 4097)), path)
    assert run("check", "--inequality", "corollary3", "--q", 1, "--density", path) == 0
    rep = json.loads(capsys.readouterr().out)[0]
    assert rep["ratio"] > 1 and rep["saturated"] is False


def test_check_malformed_csv(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,f\n0.0,abc\n")
    assert run("check", "--inequality", "corollary3", "--q", 1, "--density", bad) == 2
    bad.write_text("a,b\n0,1\n")
    assert run("check", "--inequality", "corollary3", "--q", 1, "--density", bad) == 2


def test_check_csv_output_matches_json(tmp_path):
    j, c = tmp_path / "r.json", tmp_path / "r.csv"
    args = ("check", "--inequality", "lutwak", "--q", 0.8, "--alpha", 2)
    assert run(*args, "--out", j) == 0
    assert run(*args, "--format", "csv", "--out", c) == 0
    rep = json.loads(j.read_text())[0]
    header, row = c.read_text().splitlines()
    cells = dict(zip(header.split(","), row.split(",")))
    for key in ("lhs", "rhs", "ratio"):
        assert float(cells[key]) == rep[key]


def test_sweep_config_and_inadmissible(tmp_path, capsys):
    cfg = {"inequality_id": "corollary3", "q_values": [0.8, 1.5, 0.6],
           "alpha_values": [2.0, 0.5], "gamma_values": [0.5, 1.0], "mode": "analytic"}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    assert run("check", "--config", path) == 0
    captured = capsys.readouterr()
    rep = json.loads(captured.out)
    # alpha = 0.5 has no finite conjugate beta > 1
    assert [r["q"] for r in rep] == [0.8, 0.8, 1.5, 1.5, 0.6, 0.6]
    assert all(r["saturated"] for r in rep)
    assert captured.err.count("inadmissible") == 3
    with pytest.raises(UsageError):
        SweepConfig.from_dict({"q_values": [1.0]})


def test_sweep_byte_identical(tmp_path, monkeypatch):
    cfg = {"inequality_id": "corollary4", "q_values": [0.8, 1.2], "alpha_values": [2.0, 3.0],
           "gamma_values": [1.0], "grid": {"points": 2049}}
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("check", "--config", path, "--out", a) == 0
    monkeypatch.setenv("QCRAMER_THREADS", "4")
    assert run("check", "--config", path, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_estimate_symmetric_and_collapse(tmp_path, capsys):
    rng = np.random.default_rng(4)
    half = np.abs(rng.standard_normal(30)) + 0.05
    path = tmp_path / "s.csv"
    write_samples_csv(np.concatenate([1.5 + half, 1.5 - half]), path)
    assert run("estimate", "--method", "mle", "--samples", path) == 0
    mle = json.loads(capsys.readouterr().out)
    assert mle["theta_hat"] == pytest.approx(1.5, abs=1e-8)
    assert run("estimate", "--method", "mlq", "--q", 1, "--samples", path) == 0
    assert json.loads(capsys.readouterr().out)["theta_hat"] == mle["theta_hat"]
    assert run("estimate", "--method", "mel", "--q", 0.7, "--samples", path) == 0


def test_estimate_infeasible_exit_3(tmp_path, capsys):
    path = tmp_path / "s.csv"
    write_samples_csv([-3.0, 0.0, 3.0], path)
    assert run("estimate", "--method", "mle", "--samples", path, "--family-q", 2,
               "--family-gamma", 1) == 3
    assert "infeasible" in capsys.readouterr().err


def test_sample_command(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sample", "--q", 1, "--n", 100, "--seed", 3, "--theta", 2, "--out", a) == 0
    assert run("sample", "--q", 1, "--n", 100, "--seed", 3, "--theta", 2, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_experiment_reproducible(tmp_path):
    cfg = {"family": {"q": 1.0, "alpha": 2.0, "gamma": 0.5}, "theta0": 0.3, "n": [30, 300],
           "replications": 20, "methods": [{"name": "mle"}, {"name": "mlq", "q": 1.0}],
           "seed": 7}
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    reps, reps2 = tmp_path / "reps.csv", tmp_path / "reps2.csv"
    assert run("experiment", "--config", path, "--out", a, "--per-replication", reps) == 0
    assert run("experiment", "--config", path, "--out", b, "--per-replication", reps2) == 0
    assert a.read_bytes() == b.read_bytes() and reps.read_bytes() == reps2.read_bytes()
    res = json.loads(a.read_text())["results"]
    for n in (30, 300):
        mse = [r["mse"] for r in res if r["n"] == n]
        assert mse[0] == pytest.approx(mse[1], rel=1e-12)
    assert json.loads(a.read_text())["mse_decreasing_in_n"]["mle:1.0"] is True
    assert len(reps.read_text().splitlines()) == 1 + 2 * 2 * 20


def test_experiment_bad_config(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text("{\"family\": {\"q\": 1.0}, \"n\": [0]}")
    assert run("experiment", "--config", path) == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qcramer", "pdf", "--q", "0.1", "--alpha", "0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "1 - alpha" in proc.stderr
