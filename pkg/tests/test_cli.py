import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import oracles
from mvscore.cli import main, read_config_file, UsageError

HERE = Path(__file__).parent
FIX = HERE / "fixtures"
GOLD = HERE / "golden"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_constants_golden(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    assert out == (GOLD / "constants.txt").read_text()


def test_score_golden_and_oracles(capsys):
    code, out, _ = run(capsys, "score", "--ensemble", FIX / "ensemble.csv", "--obs", FIX / "obs.csv")
    assert code == 0
    got = json.loads(out)["scores"]
    want = json.loads((GOLD / "score.json").read_text())["scores"]
    assert got.keys() == want.keys()
    for k in want:
        assert got[k] == pytest.approx(want[k], rel=1e-12)
    x = np.loadtxt(FIX / "ensemble.csv", delimiter=",", skiprows=1)
    y = np.loadtxt(FIX / "obs.csv", delimiter=",")
    assert got["ES"] == pytest.approx(oracles.energy_band(x, y, 1), rel=1e-12)
    assert got["VS"] == pytest.approx(oracles.variogram_full(x, y), rel=1e-12)
    assert got["DSS"] == pytest.approx(oracles.dss_direct(x, y), rel=1e-10)
    assert got["CRPS"] == pytest.approx(np.mean([oracles.crps_pairs(x[:, c], y[c]) for c in range(3)]), rel=1e-12)
    assert got["CRPS-CES"] == pytest.approx(got["CRPS"] * got["CES"], rel=1e-12)


def test_score_selected_and_estimator_flags(capsys):
    code, out, _ = run(
        capsys, "score", "--ensemble", FIX / "ensemble.csv", "--obs", FIX / "obs.csv",
        "--scores", "ES", "--estimator", "iid_split",
    )
    assert code == 0 and list(json.loads(out)["scores"]) == ["ES"]


def test_dm_golden(capsys):
    code, out, _ = run(capsys, "dm", FIX / "loss_a.csv", FIX / "loss_b.csv")
    assert code == 0
    got = json.loads(out)
    assert got == pytest.approx(json.loads((GOLD / "dm.json").read_text()), rel=1e-12)
    a = np.loadtxt(FIX / "loss_a.csv", skiprows=1)
    b = np.loadtxt(FIX / "loss_b.csv", skiprows=1)
    assert got["statistic"] == pytest.approx(oracles.dm_statistic(a, b), rel=1e-12)


def test_bad_row_exits_2_naming_file_and_row(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n4,oops,6\n")
    code, _, err = run(capsys, "score", "--ensemble", bad, "--obs", FIX / "obs.csv")
    assert code == 2
    assert "bad.csv" in err and "row 2" in err


def test_dimension_mismatch_exits_2(tmp_path, capsys):
    obs = tmp_path / "obs.csv"
    obs.write_text("1,2\n")
    code, _, err = run(capsys, "score", "--ensemble", FIX / "ensemble.csv", "--obs", obs)
    assert code == 2 and "obs.csv" in err


def test_missing_file_exits_2(capsys):
    code, _, _ = run(capsys, "dm", "nope.csv", FIX / "loss_b.csv")
    assert code == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# comment\nm = 128\nm_grid = 16, 32\nq = 2.5\n")
    assert read_config_file(cfg) == {"m": 128, "m_grid": (16, 32), "q": 2.5}
    cfg.write_text("m = 1\nbogus = 3\n")
    with pytest.raises(UsageError, match="line 2"):
        read_config_file(cfg)


def test_invalid_study_config_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "study", "peak", "--m", "1", "--out", tmp_path)
    assert code == 2 and "M must be" in err


def test_study_airline_table_shape(tmp_path, capsys):
    code, out, _ = run(capsys, "study", "airline", "--m", "128", "--series", FIX / "airpassengers.csv", "--out", tmp_path)
    assert code == 0
    manifest = json.loads(out)
    assert manifest["study"] == "airline" and manifest["params"]["m"] == 128
    lines = (tmp_path / "airline_table.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert len(header) == 10 and len(lines) == 10
    cdss = dict(zip(header, next(l for l in lines if l.startswith("CDSS,")).split(",")))
    for name in header[1:]:
        assert (cdss[name] == "") == (name.endswith("-M") or name.endswith("-W"))
    curves = (tmp_path / "airline_curves.csv").read_text().splitlines()
    assert curves[0] == "model,score,dim,start_h,window_mean"


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("MVSCORE_OUT", str(tmp_path / "env"))
    code, _, _ = run(capsys, "study", "ensemble-size", "--n", "4", "--l", "1", "--m-grid", "16", "--h-grid", "3")
    assert code == 0
    assert (tmp_path / "env" / "ensemble_size.csv").exists()


def test_full_scale_warns(capsys, tmp_path, monkeypatch):
    # full scale with tiny overrides so the run is quick; only the warning matters
    code, _, err = run(
        capsys, "study", "ensemble-size", "--paper-scale", "--n", "4", "--l", "1",
        "--m-grid", "16", "--h-grid", "3", "--out", tmp_path,
    )
    assert code == 0 and "warning" in err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["study", "unknown"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "mvscore", "constants"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("a1 = ")
