import csv
import io
import json
import subprocess
import sys

import pytest

from gabormat.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), buf)
    return code, buf.getvalue()


def test_verify_heat_defaults_pass():
    code, out = run("verify", "--operator", "heat")
    assert code == 0
    assert "PASS" in out and "pairs=9604" in out


def test_verify_flipped_sign_fails():
    code, out = run("verify", "--operator", "heat", "--flip-sign")
    assert code == 1
    assert "FAIL" in out and "worst pair" in out


def test_verify_repulsor_small_window(monkeypatch):
    monkeypatch.setenv("GABOR_THREADS", "4")
    code, out = run("verify", "--operator", "repulsor", "--radius", "1", "--t", "0.5")
    assert code == 0 and "repulsor\tpairs=81" in out


def test_verify_rejects_genheat():
    assert run("verify", "--operator", "genheat")[0] == 2


def test_matrix_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("matrix", "--operator", "repulsor", "--t", "0.5", "--radius", "3", "--out", str(a))[0] == 0
    assert run("matrix", "--operator", "repulsor", "--t", "0.5", "--radius", "3", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(io.StringIO(a.read_text())))
    assert rows[0] == ["m_idx1", "n_idx1", "mp_idx1", "np_idx1", "modulus"]
    assert len(rows) == 49 ** 2 + 1


def test_matrix_several_operators_go_to_a_directory(tmp_path):
    code, out = run("matrix", "--operator", "heat", "--rho", "0.5", "1", "--t", "0.1",
                    "--radius", "1", "--out", str(tmp_path / "m"))
    assert code == 0
    names = sorted(p.name for p in (tmp_path / "m").iterdir())
    assert names == ["heat_d1_rho0.5_t0.1.csv", "heat_d1_rho1_t0.1.csv"]


def test_matrix_two_dimensional_slice(tmp_path):
    code, out = run("matrix", "--dim", "2", "--radius", "2", "--out", str(tmp_path / "h.json"),
                    "--format", "json")
    assert code == 0
    data = json.loads((tmp_path / "h.json").read_text())
    assert len(data["entries"]) == 5 ** 4
    assert all(e[2] == [0, 0] and e[3] == [0, 0] for e in data["entries"])


def test_genheat_matrix_exports_bounds(tmp_path):
    code, _ = run("matrix", "--operator", "genheat", "--k", "2", "--t", "1", "--radius", "1",
                  "--out", str(tmp_path / "g.csv"))
    assert code == 0
    assert (tmp_path / "g.csv").read_text().splitlines()[0].endswith("bound")


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"operator": "repulsor", "t": [0.5], "radius": 1, "format": "json"}))
    code, out = run("matrix", "--config", str(cfg), "--t", "1", "--out", str(tmp_path / "r.json"))
    assert code == 0
    from gabormat import LatticeIndex, LatticeParams, repulsor_entry_modulus
    entries = json.loads((tmp_path / "r.json").read_text())["entries"]
    m, n, mp, np_, v = entries[0]
    expect = repulsor_entry_modulus(LatticeIndex(m, n), LatticeIndex(mp, np_), 1.0, 1,
                                    LatticeParams(1.0, 0.5))
    assert v == pytest.approx(expect, rel=1e-15)


@pytest.mark.parametrize("argv", [
    ["matrix", "--alpha", "-1", "--out", "x.csv"],
    ["matrix", "--rho", "0", "--out", "x.csv"],
    ["matrix", "--operator", "nope"],
    ["matrix"],
    ["sparsity", "--eps", "-1"],
    ["spectrogram", "--dim", "2", "--out", "x"],
])
def test_configuration_errors(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(*argv)[0] == 2


def test_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("matrix", "--config", str(bad), "--out", str(tmp_path / "x.csv"))[0] == 2
    bad.write_text("[1, 2]")
    assert run("matrix", "--config", str(bad), "--out", str(tmp_path / "x.csv"))[0] == 2
    assert run("matrix", "--config", str(tmp_path / "missing.json"))[0] == 3


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("matrix", "--radius", "1", "--out", str(blocker / "sub" / "x.csv"))[0] == 3


def test_spectrogram_tracks_the_moving_datum(tmp_path):
    code, out = run("spectrogram", "--datum-m", "2", "--datum-n", "-1.5", "--t", "0", "1",
                    "--stft-points", "65", "--out", str(tmp_path / "s"))
    assert code == 0
    lines = out.strip().splitlines()
    assert "peak=(2, -1.5)" in lines[0]
    assert all("energy=0.5" in line for line in lines)
    rows = list(csv.reader(io.StringIO((tmp_path / "s" / "spectrogram_t1.csv").read_text())))
    assert rows[0] == ["x", "omega", "magnitude"] and len(rows) == 65 * 65 + 1


def test_sparsity_table(tmp_path):
    code, out = run("sparsity", "--radius", "4", "--eps", "1e-3", "1e-6",
                    "--out", str(tmp_path / "sp.csv"))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "sp.csv").read_text())))
    thr = [r for r in rows if r["table"] == "threshold"]
    assert [float(r["eps"]) for r in thr] == [0.0, 1e-3, 1e-6]
    assert int(thr[0]["kept"]) == int(thr[0]["considered"]) == 81 ** 2
    assert float(thr[0]["apply_rel_error"]) < 1e-5
    assert len([r for r in rows if r["table"] == "radius"]) == 6
    assert "radius_slope=" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gabormat", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "matrix" in res.stdout
