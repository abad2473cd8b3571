"""Command-line interface: formats, determinism, exit codes, config files."""

import csv
import json
import math
import re

import numpy as np
import pytest

from pinnedplate.cli import run


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _eval_exact(text: str) -> float:
    """Evaluate 'a*sqrt(s)*pi/b'-style exact strings or plain floats."""
    if re.fullmatch(r"[-+0-9.eE]+", text):
        return float(text)
    if re.fullmatch(r"-?\d+/\d+", text):
        num, den = text.split("/")
        return float(num) / float(den)
    expr = text.replace("sqrt", "math.sqrt").replace("pi", "math.pi")
    if not re.fullmatch(r"[0-9*/().a-z_ ]+", expr):
        raise ValueError(f"unexpected token in {text!r}")
    return float(eval(expr, {"math": math, "__builtins__": {}}))


def test_triples_contains_high_multiplicity_corner(tmp_path):
    out = tmp_path / "triples.csv"
    assert run(["triples", "--rho-sq", "3", "--kmax", "10",
                "--index-bound", "3", "-o", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["sextet", "kappa_x", "kappa_y", "k", "multiplicity", "in_bz"]
    hits = [r for r in rows
            if abs(_eval_exact(r[1]) - 0.5) < 1e-12
            and abs(_eval_exact(r[2]) - 0.5) < 1e-12
            and abs(_eval_exact(r[3]) - 9.5977) < 1e-3]
    assert hits
    assert int(hits[0][4]) >= 4
    assert (tmp_path / "triples.csv.config").exists()


def test_bands_reproduces_y_degeneracy(tmp_path):
    out = tmp_path / "bands.csv"
    assert run(["bands", "--rho-sq", "2", "--path", "G,X,M,Y,G",
                "--samples", "3", "--kmin", "6.0", "--kmax", "7.0",
                "--cutoff", "32", "-o", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["leg", "path_param", "k0x", "k0y",
                      "band_index", "k", "classification"]
    y = (0.0, np.pi / np.sqrt(2.0))
    found = [r for r in rows
             if abs(float(r[2]) - y[0]) < 1e-9 and abs(float(r[3]) - y[1]) < 1e-9
             and r[6] == "massless"
             and abs(float(r[5]) - 6.6643) < 1e-3]
    assert found
    assert any(r[6].startswith("LL:") for r in rows)


def test_surface_and_contours_roundtrip(tmp_path):
    kd1 = 2 * np.pi * np.sqrt(4 / 3)
    common = ["--family", "triangular", "--d", "1",
              "--nx", "24", "--ny", "24", "--kx0", "0", "--kx1", "0.2",
              "--ky0", "0", "--ky1", "0.2",
              "--kmin", str(kd1 - 0.3), "--kmax", str(kd1 - 1e-9)]
    surf_out = tmp_path / "surface.csv"
    assert run(["surface", *common, "-o", str(surf_out)]) == 0
    header, rows = _read_csv(surf_out)
    assert header == ["i", "j", "k0x", "k0y", "band_index", "k"]
    assert rows

    cont_out = tmp_path / "contours.csv"
    assert run(["contours", *common, "--levels", str(kd1 - 0.05),
                "-o", str(cont_out)]) == 0
    header, rows = _read_csv(cont_out)
    assert header == ["level", "polyline_id", "vertex_index", "k0x", "k0y"]
    assert rows

    dos_out = tmp_path / "dos.csv"
    assert run(["dos", *common, "--levels", str(kd1 - 0.05),
                "--symmetry-factor", "4", "-o", str(dos_out)]) == 0
    header, rows = _read_csv(dos_out)
    assert header == ["k", "dos"]
    assert float(rows[0][1]) > 0


def test_cones_table(tmp_path):
    out = tmp_path / "cones.csv"
    assert run(["cones", "--point", "first", "-o", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["branch", "alpha", "beta", "c", "gamma"]
    alphas = sorted(float(r[1]) for r in rows)
    assert alphas[0] == pytest.approx(2 / np.sqrt(3), abs=1e-3)
    assert alphas[1] == pytest.approx(2.0, abs=1e-3)


def test_cluster_outputs(tmp_path):
    out = tmp_path / "cluster.csv"
    assert run(["cluster", "--rho-sq", "2", "--k", "3.069",
                "--half-width", "4", "--grid-n", "11", "-o", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["m", "n", "x", "y", "re_a", "im_a", "abs_a"]
    assert len(rows) == 81
    fheader, frows = _read_csv(str(out) + "_field.csv")
    assert fheader == ["x", "y", "re_w", "im_w", "abs_w"]
    assert len(frows) == 121
    lheader, lrows = _read_csv(str(out) + "_localization.csv")
    assert lheader == ["direction_deg", "anisotropy"]
    ang = float(lrows[0][0]) % 180.0
    assert min(abs(ang - 90.0), abs(ang + 90.0)) < 20.0


def test_greens_free_kernel(tmp_path):
    out = tmp_path / "g.csv"
    assert run(["greens", "--kernel", "free", "--k", "5", "--points",
                "0,0;0.5,0", "-o", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["x", "y", "re", "im"]
    assert float(rows[0][3]) == pytest.approx(1 / (8 * 25.0), rel=1e-12)


def test_filter_command(tmp_path):
    out = tmp_path / "f.csv"
    assert run(["filter", "--family", "triangular", "--k", "4.2464209",
                "-o", str(out)]) == 0
    header, rows = _read_csv(out)
    assert header == ["k", "re_eta", "im_eta", "passed"]
    assert rows[0][3] == "true"


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as excinfo:
        run(["frobnicate"])
    assert excinfo.value.code == 2


def test_numerical_failure_exits_3(tmp_path, capsys):
    out = tmp_path / "g.csv"
    code = run(["greens", "--kernel", "quasiperiodic", "--k", "0.3",
                "--k0x", "0.3", "--points", "0.2,0.2", "-o", str(out)])
    assert code == 3
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "PoleProximityError"


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["triples", "--rho-sq", "2", "--kmax", "9", "--index-bound", "3"]
    assert run([*args, "-o", str(a)]) == 0
    assert run([*args, "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_with_override(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("rho-sq=3\nkmax=10\nindex-bound=3\n")
    out = tmp_path / "t.csv"
    assert run(["triples", "--config", str(cfgfile), "--kmax", "8",
                "-o", str(out)]) == 0
    sidecar = (tmp_path / "t.csv.config").read_text()
    assert "kmax=8.0" in sidecar          # flag wins over config file
    assert "rho_sq=3" in sidecar


def test_config_file_unknown_key_rejected(tmp_path):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("frobnicate=1\n")
    with pytest.raises(SystemExit) as excinfo:
        run(["triples", "--config", str(cfgfile), "-o", "-"])
    assert excinfo.value.code == 2


def test_json_format(tmp_path):
    out = tmp_path / "t.json"
    assert run(["triples", "--rho-sq", "2", "--kmax", "8",
                "--index-bound", "2", "--format", "json", "-o", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["columns"] == ["sextet", "kappa_x", "kappa_y", "k",
                                  "multiplicity", "in_bz"]
    assert payload["rows"]
