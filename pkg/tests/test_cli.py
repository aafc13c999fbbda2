import csv
import io

import numpy as np
import pytest

from nlkpp import build_grid, sample
from nlkpp.cli import main
from nlkpp.io import field_to_csv, read_field, read_rate_points, write_field


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_eigen(capsys, tmp_path):
    phi = tmp_path / "phi.csv"
    assert main(["eigen", "--sigma", "0.1", "--m", "2", "--n", "200", "--dump-phi", str(phi)]) == 0
    (row,) = _rows(capsys.readouterr().out)
    lam = float(row["lambda"])
    assert float(row["lower"]) <= lam <= float(row["upper"])
    g = build_grid(1.0, 200)
    values = read_field(phi, g).values
    assert values.min() >= 0 and g.weight * values @ values == pytest.approx(1.0)


def test_eigen_dirichlet_constant(capsys):
    assert main(["eigen", "--sigma", "10", "--n", "100", "--coef", "1", "--boundary", "dirichlet"]) == 0
    (row,) = _rows(capsys.readouterr().out)
    # K has row sums near |Omega|/(2 sigma), so lambda is close to -0.05
    assert float(row["lambda"]) == pytest.approx(-0.05, abs=1e-3)


def test_stationary(capsys, tmp_path):
    theta, target = tmp_path / "theta.csv", tmp_path / "abar.csv"
    assert main(["stationary", "--sigma", "0.1", "--n", "100", "--out", str(theta),
                 "--limit", "abar", "--limit-out", str(target)]) == 0
    (row,) = _rows(capsys.readouterr().out)
    assert row["exists"] == "1"
    assert float(row["residual"]) < 1e-8
    g = build_grid(1.0, 100)
    np.testing.assert_allclose(read_field(target, g).values, 2.0, atol=1e-9)
    assert read_field(theta, g).values.min() > 0


def test_evolve(capsys, tmp_path):
    final = tmp_path / "u.csv"
    assert main(["evolve", "--sigma", "50", "--n", "50", "--T", "1", "--u0", "1", "--out-times", "10",
                 "--dump-final", str(final)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 11
    assert float(rows[0]["linf_gap"]) == 0.0
    assert float(rows[-1]["t"]) == 1.0
    assert 0 < float(rows[-1]["linf_gap"]) < 1e-2
    assert final.exists()


def test_sweep_and_rate_fit(capsys, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("task = evolve-rate\nsigma = 20, 40, 80, 160\nm = 0, 1\ncoef = 2 + sin(2*pi*x)\n"
                   "u0 = 1 + 0.5*cos(pi*x)\nT = 1\nn = 100\n")
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert len(rows) == 8 and all(r["flags"] == "" for r in rows)
    capsys.readouterr()
    assert main(["rate-fit", "--in", str(out), "--m", "1", "--regime", "large"]) == 0
    (row,) = _rows(capsys.readouterr().out)
    assert row["verdict"] == "pass"
    assert float(row["slope"]) == pytest.approx(-2.0, abs=0.1)


def test_rate_fit_plain_file(capsys, tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("sigma,error\n0.1,0.03\n0.2,0.12\n0.4,0.48\n")
    assert main(["rate-fit", "--in", str(path)]) == 0
    (row,) = _rows(capsys.readouterr().out)
    assert float(row["slope"]) == pytest.approx(2.0)
    assert row["verdict"] == "ok"
    path.write_text("0.1,0.03\n0.2,0.12\n0.4,0.48\n")
    assert read_rate_points(path) == [(0.1, 0.03), (0.2, 0.12), (0.4, 0.48)]


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("sigma = -1\nm = 0\ncoef = 1\n")
    assert main(["sweep", "--config", str(cfg)]) == 1
    assert "line 1" in capsys.readouterr().err


def test_flagged_sweep_exit_code(tmp_path, capsys):
    cfg = tmp_path / "f.cfg"
    cfg.write_text("task = stationary\nsigma = 0.2\nm = 0\ncoef = sin(2*pi*x) - 0.5\nn = 40\nlimit = abar\n")
    assert main(["sweep", "--config", str(cfg)]) == 2


def test_resolution_error_is_config_error(capsys):
    assert main(["eigen", "--sigma", "0.01", "--n", "50"]) == 1
    assert "n >= 400" in capsys.readouterr().err


def test_probe(capsys):
    assert main(["probe", "dirichlet-blowup", "--sigmas", "0.2,0.1"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert float(rows[1]["lambda"]) > float(rows[0]["lambda"])
    assert main(["probe", "averaged-logistic", "--sigmas", "0.2,0.1,0.05"]) == 0
    assert len(_rows(capsys.readouterr().out)) == 3


def test_field_csv_roundtrip(tmp_path):
    g = build_grid((1.0, 2.0), (3, 4))
    f = sample(g, lambda x, y: np.sin(x) * np.exp(y) / 3)
    text = field_to_csv(f)
    assert text.splitlines()[0] == "x,y,value"
    path = tmp_path / "f.csv"
    write_field(f, path)
    np.testing.assert_array_equal(read_field(path, g).values, f.values)
