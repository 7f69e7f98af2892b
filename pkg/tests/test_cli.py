import csv
import json
import subprocess
import sys

import pytest

from dispersive_interface.cli import main

from conftest import CONFIGS, OMEGA_M

FIXTURE = CONFIGS / "fixture.toml"


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path), "--threads", "1"])


def _read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_bands_fixture(tmp_path):
    assert _run(tmp_path, "bands", "--config", str(FIXTURE)) == 0
    gaps = json.loads((tmp_path / "gaps.json").read_text())
    assert len(gaps["gaps"]) >= 1 and len(gaps["common_gaps"]) == 1
    rows = _read_csv(tmp_path / "bands.csv")
    assert {r["material"] for r in rows} == {"A", "B"}


def test_gaps_edge_labels(tmp_path):
    assert _run(tmp_path, "gaps", "--config", str(FIXTURE)) == 0
    first = {g["material"]: g for g in json.loads((tmp_path / "gaps.json").read_text())["gaps"]
             if g["index"] == 0}
    assert first["A"]["bulk_index"] == -1 and first["B"]["bulk_index"] == 1
    assert first["A"]["lower_symmetry"] == "antisymmetric" and first["B"]["lower_symmetry"] == "symmetric"


def test_bands_homogeneous(tmp_path):
    assert _run(tmp_path, "bands", "--config", str(CONFIGS / "homogeneous.toml")) == 0
    gaps = json.loads((tmp_path / "gaps.json").read_text())
    assert gaps["gaps"] == [] and gaps["common_gaps"] == []


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text(FIXTURE.read_text().replace("beta = 0.5", "beta = 0.5\nbogus = 1"))
    assert _run(tmp_path, "bands", "--config", str(bad)) == 2
    assert "material.eps2.bogus" in capsys.readouterr().err


def test_interface_fixture(tmp_path):
    assert _run(tmp_path, "interface", "--config", str(FIXTURE)) == 0
    rep = json.loads((tmp_path / "interface.json").read_text())
    assert rep["status"] == "mode"
    assert rep["omega_m"] == pytest.approx(OMEGA_M, rel=1e-12)
    assert "decay_a" in rep and "decay_b" in rep
    assert len(_read_csv(tmp_path / "profile.csv")) > 0


def test_interface_same_cells(tmp_path):
    assert _run(tmp_path, "interface", "--config", str(CONFIGS / "same_cells.toml")) == 0
    rep = json.loads((tmp_path / "interface.json").read_text())
    assert rep["status"] == "no_mode" and abs(rep["index_sum"]) == 2


def test_interface_disjoint(tmp_path):
    assert _run(tmp_path, "interface", "--config", str(CONFIGS / "disjoint.toml")) == 0
    rep = json.loads((tmp_path / "interface.json").read_text())
    assert rep["status"] == "no_common_gap" and rep["common_gaps"] == []


def test_zak_and_rerun_identical(tmp_path):
    args = ["zak", "--config", str(FIXTURE), "--kappa-points", "61", "--grid", "256"]
    assert _run(tmp_path / "a", *args) == 0
    assert _run(tmp_path / "b", *args) == 0
    a, b = (tmp_path / "a" / "zak.json").read_bytes(), (tmp_path / "b" / "zak.json").read_bytes()
    assert a == b
    rows = json.loads(a)["bands"]
    assert {(r["material"], r["classified"]) for r in rows if r["band"] == 1} == {("A", 0), ("B", 3.141592653589793)}


def test_zak_asymmetric_warns(tmp_path):
    cfg = tmp_path / "asym.toml"
    cfg.write_text(FIXTURE.read_text().replace("sigma = 0.0", "sigma = 0.03"))
    with pytest.warns(UserWarning, match="not mirror-symmetric"):
        assert _run(tmp_path, "zak", "--config", str(cfg), "--kappa-points", "41", "--grid", "128") == 0
    rows = json.loads((tmp_path / "zak.json").read_text())["bands"]
    assert all(r.get("classified") is None for r in rows)


def test_impedance(tmp_path):
    assert _run(tmp_path, "impedance", "--config", str(FIXTURE)) == 0
    rows = _read_csv(tmp_path / "impedance.csv")
    assert len(rows) == 64
    zp = [float(r["z_plus"]) for r in rows]
    assert all(b < a for a, b in zip(zp, zp[1:]))


def test_profile(tmp_path):
    assert _run(tmp_path, "profile", "--config", str(FIXTURE)) == 0
    assert len(_read_csv(tmp_path / "profile.csv")) == 24 * 32 + 1




def test_sweep_delta_first_row(tmp_path):
    text = FIXTURE.read_text().replace("delta_points = 33", "delta_grid = [0.0, 0.001, 0.01]")
    cfg = tmp_path / "d.toml"
    cfg.write_text(text)
    assert _run(tmp_path, "sweep-delta", "--config", str(cfg)) == 0
    rows = _read_csv(tmp_path / "sweep_delta.csv")
    assert len(rows) == 3 and rows[0]["status"] == "ok"
    assert float(rows[0]["omega_m"]) == pytest.approx(OMEGA_M, rel=1e-10)


def test_sweep_sigma_error_rows(tmp_path):
    text = FIXTURE.read_text().replace("sigma_points = 31", "sigma_grid = [0.0, 0.1, 0.2]")
    cfg = tmp_path / "s.toml"
    cfg.write_text(text)
    assert _run(tmp_path, "sweep-sigma", "--config", str(cfg)) == 0
    rows = _read_csv(tmp_path / "sweep_sigma.csv")
    assert [r["status"] for r in rows] == ["ok", "ok", "error"]


def test_sweep_delta_needs_kind(tmp_path):
    assert _run(tmp_path, "sweep-delta", "--config", str(CONFIGS / "same_cells.toml")) == 2


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "dispersive_interface.cli", "gaps", "--config",
                          str(FIXTURE), "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert (tmp_path / "gaps.json").exists()
