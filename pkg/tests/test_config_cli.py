import json

import numpy as np
import pytest

from mps2d.cli import main
from mps2d.config import RunConfig, parse_config, serialize_config
from mps2d.errors import ConfigError
from mps2d.specfun import bessel_j_zero

DISC_SCAN = """
# unit disc Dirichlet window around the ground eigenvalue
bc = "dirichlet"
basis = "fourier_bessel"
fb_max_order = 20
n_boundary = 256
e_lo = 5.0
e_hi = 6.0
n_grid = 50
format = "csv"
"""


def write_cfg(tmp_path, text=DISC_SCAN, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parse_round_trip():
    data = parse_config(DISC_SCAN)
    assert data["bc"] == "dirichlet"
    assert data["e_lo"] == 5.0
    assert data["n_grid"] == 50
    again = parse_config(serialize_config(data))
    assert again == data


def test_parse_arrays_and_comments():
    data = parse_config('radial_cos = [0.1, 0.0, 0.3]  # blob\nradial_sin = []\n')
    assert data["radial_cos"] == [0.1, 0.0, 0.3]
    assert data["radial_sin"] == []


def test_parse_errors():
    with pytest.raises(ConfigError):
        parse_config("just a line\n")
    with pytest.raises(ConfigError):
        parse_config("key = @bad@\n")
    with pytest.raises(ConfigError):
        parse_config("2bad = 1\n")


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"not_a_key": 1})


def test_runconfig_validation():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"bc": "robin"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"format": "xml"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"radial_cos": ["a"]})
    cfg = RunConfig.from_dict({"e_lo": 6.0, "e_hi": 5.0})
    with pytest.raises(ConfigError):
        cfg.window()


def test_scan_csv_output(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "curve.csv"
    assert main(["scan", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("#")
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 50
    assert all(len(r) == 7 for r in rows)
    data = np.array([[float(v) for v in r] for r in rows])
    minimum_e = data[np.argmin(data[:, 1]), 0]
    oracle = bessel_j_zero(0, 1) ** 2
    assert abs(minimum_e - oracle) <= (6.0 - 5.0) / 49.0
    # figure rendered alongside the delimited output
    assert (tmp_path / "curve.png").exists()


def test_scan_rerun_is_byte_identical(tmp_path):
    cfg = write_cfg(tmp_path)
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["scan", "--config", cfg, "--out", str(out1), "--no-plot"]) == 0
    assert main(["scan", "--config", cfg, "--out", str(out2), "--no-plot"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_scan_json_output(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "curve.json"
    assert main(["scan", "--config", cfg, "--out", str(out), "--format", "json",
                 "--no-plot"]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["energies"]) == 50
    assert len(payload["higher_tensions"][0]) == 5


def test_no_plot_suppresses_figure(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "curve.csv"
    assert main(["scan", "--config", cfg, "--out", str(out), "--no-plot"]) == 0
    assert not (tmp_path / "curve.png").exists()


def test_solve_certificates(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "certs.json"
    assert main(["solve", "--config", cfg, "--out", str(out), "--format",
                 "json"]) == 0
    payload = json.loads(out.read_text())
    assert payload["bc"] == "dirichlet"
    certs = payload["certificates"]
    assert len(certs) == 1
    rec = certs[0]
    oracle = bessel_j_zero(0, 1) ** 2
    assert abs(rec["e_star"] - oracle) / oracle < 1e-9
    lo, hi = rec["interval"]
    width = hi - lo
    assert lo - width <= oracle <= hi + width   # 3x inflated interval
    assert rec["moler_payne_interval"][1] >= hi
    assert len(rec["coeffs"]) == 41
    assert (tmp_path / "certs.png").exists()


def test_solve_empty_window(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "empty.json"
    assert main(["solve", "--config", cfg, "--out", str(out), "--format", "json",
                 "--e-lo", "7.0", "--e-hi", "12.0", "--no-plot"]) == 0
    payload = json.loads(out.read_text())
    assert payload["certificates"] == []


def test_solve_csv(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "certs.csv"
    assert main(["solve", "--config", cfg, "--out", str(out), "--no-plot"]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2
    assert len(lines[1].split(",")) == 11


def test_mode_from_solve(tmp_path):
    cfg = write_cfg(tmp_path)
    certs = tmp_path / "certs.json"
    assert main(["solve", "--config", cfg, "--out", str(certs), "--format",
                 "json", "--no-plot"]) == 0
    out = tmp_path / "mode.csv"
    assert main(["mode", "--config", cfg, "--from-solve", str(certs),
                 "--out", str(out), "--grid-n", "60"]) == 0
    lines = out.read_text().strip().splitlines()
    meta = [line for line in lines if line.startswith("#")]
    rows = [line for line in lines if not line.startswith("#")]
    assert len(rows) == 60
    assert all(len(r.split(",")) == 60 for r in rows)
    assert any("e_star" in line for line in meta)
    assert (tmp_path / "mode.png").exists()


def test_mode_resolve_window(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "mode.json"
    assert main(["mode", "--config", cfg, "--out", str(out), "--format", "json",
                 "--grid-n", "40", "--no-plot"]) == 0
    payload = json.loads(out.read_text())
    assert len(payload["values"]) == 40
    oracle = bessel_j_zero(0, 1) ** 2
    assert abs(payload["metadata"]["e_star"] - oracle) / oracle < 1e-9


def test_mode_without_minimum_fails_numerically(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "mode.csv"
    code = main(["mode", "--config", cfg, "--out", str(out),
                 "--e-lo", "7.0", "--e-hi", "12.0", "--no-plot"])
    assert code == 2


def test_usage_errors_exit_one(tmp_path):
    assert main(["scan"]) == 1                       # no out path
    assert main(["scan", "--nonsense"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("bc = \"robin\"\n", encoding="utf-8")
    assert main(["scan", "--config", str(bad), "--out",
                 str(tmp_path / "x.csv")]) == 1
    assert main(["verify-disc", "--freq-max", "200"]) == 1


def test_verify_disc_passes(tmp_path, capsys):
    out = tmp_path / "report.txt"
    assert main(["verify-disc", "--freq-max", "15", "--out", str(out)]) == 0
    text = out.read_text()
    assert "sqrt2" in text
    assert "pass" in text
    assert "FAIL" not in text


MFS_SOLVE = """
bc = "neumann"
basis = "mfs"
mfs_points = 60
mfs_offset = 0.25
n_boundary = 128
e_lo = 3.0
e_hi = 4.0
n_grid = 25
format = "json"
"""


def test_solve_with_mfs_config(tmp_path):
    cfg = write_cfg(tmp_path, MFS_SOLVE, name="mfs.cfg")
    out = tmp_path / "mfs.json"
    assert main(["solve", "--config", cfg, "--out", str(out), "--no-plot"]) == 0
    payload = json.loads(out.read_text())
    rec = payload["certificates"][0]
    from mps2d.specfun import bessel_jprime_zero
    oracle = bessel_jprime_zero(1, 1) ** 2
    assert abs(rec["e_star"] - oracle) / oracle < 1e-6
    assert len(rec["coeffs"]) == 60


def test_full_precision_round_trip(tmp_path):
    cfg = write_cfg(tmp_path)
    out = tmp_path / "certs.json"
    main(["solve", "--config", cfg, "--out", str(out), "--format", "json",
          "--no-plot"])
    rec = json.loads(out.read_text())["certificates"][0]
    from mps2d.config import RunConfig as RC
    from mps2d.config import load_config
    from mps2d.scanner import solve_window
    cfg_obj = RC.from_dict({**load_config(cfg), "out": "x", "e_lo": 5.0,
                            "e_hi": 6.0})
    _, records = solve_window(cfg_obj.problem(), 5.0, 6.0, 50)
    assert rec["e_star"] == records[0].e_star     # exact float round-trip
