import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from abelym.cli import UsageError, main, parse_gen_spec
from abelym.mesh import gen_circle, load_mesh


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gen", "--disk", "8", "--out", str(a)]) == 0
    assert main(["gen", "--disk", "8", "--out", str(b)]) == 0
    fa, fb = a / "disk8.json", b / "disk8.json"
    assert fa.read_bytes() == fb.read_bytes()
    mesh = load_mesh(fa.read_text())
    assert mesh.dim == 2 and not mesh.is_closed


def test_gen_to_file_and_reload(tmp_path):
    path = tmp_path / "ann.json"
    assert main(["gen", "--annulus", "8", "--r-in", "0.5", "--out", str(path)]) == 0
    mesh = load_mesh(path.read_text())
    assert set(mesh.boundary_labels) >= {"Sigma_inner", "Sigma_outer"}


def test_gen_spec_parser():
    assert parse_gen_spec("circle:12").n_simplices(1) == 12
    c = parse_gen_spec("collar:circle:8:3:0.5")
    assert c.metric_source == "product_collar"
    assert parse_gen_spec("torus:8").is_closed
    with pytest.raises(UsageError):
        parse_gen_spec("sphere:3")


def test_dn_disk_csv(tmp_path, capsys):
    assert main(["dn", "--gen", "disk:16", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader((tmp_path / "lambda_reduced.csv").open()))
    assert len(rows) == 1 and len(rows[0]) == 1
    expected = 32 * np.sin(np.pi / 16) / (8 * np.sin(np.pi / 8))
    assert np.isclose(float(rows[0][0]), expected, rtol=1e-10)
    raw = np.loadtxt(tmp_path / "lambda_raw.csv", delimiter=",")
    assert raw.shape == (16, 16)
    assert (tmp_path / "spectrum.csv").exists()
    assert not (tmp_path / "dn.json").exists()


def test_dn_json_stdout(capsys):
    code, out, _ = run(["dn", "--gen", "annulus:8", "--json"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["kernel"]["dim"] == 1 and rep["range"]["dim"] == 1


def test_decompose(capsys):
    code, out, _ = run(["decompose", "--gen", "annulus:8", "--seed", "3"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["dims"]["H_N"] == 1 and rep["dims"]["H_D"] == 1
    assert rep["reconstruction_residual"] <= 1e-10
    assert rep["orthogonality_residual"] <= 1e-10


def test_decompose_cochain_file(tmp_path, capsys):
    f = tmp_path / "w.json"
    # unit circulation along the circle, in sorted-edge orientation
    circulation = gen_circle(16).oriented_top()
    f.write_text(json.dumps({"values": circulation.tolist()}))
    code, out, _ = run(["decompose", "--gen", "circle:16", "--cochain", str(f)], capsys)
    assert code == 0
    split = json.loads(out)["split"]
    assert np.allclose(split["h_N"]["values"], circulation)


def test_reduce(capsys):
    code, out, _ = run(["reduce", "--gen", "annulus:8"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["codimension"] == 2
    assert rep["dynamics"]["lagrangian"] and rep["dynamics"]["graph"]
    code, out, _ = run(["reduce", "--gen", "circle:16"], capsys)
    assert json.loads(out)["L_Sigma"]["dim"] == 2


def test_glue(tmp_path, capsys):
    assert main(["glue", "--gen", "annulus:8", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "glue_report.json").read_text())
    assert (rep["codim_before"], rep["codim_after"], rep["monotone"]) == (2, 0, True)
    assert load_mesh((tmp_path / "glued.json").read_text()).is_closed


def test_glue_with_map_file(tmp_path, capsys):
    mesh_path = tmp_path / "collar.json"
    assert main(["gen", "--gen", "collar:circle:8:3:0.5", "--out", str(mesh_path)]) == 0
    mesh = load_mesh(mesh_path.read_text())
    map_path = tmp_path / "map.json"
    map_path.write_text(json.dumps(mesh.gluing_maps[0].to_dict()))
    code, out, _ = run(["glue", "--mesh", str(mesh_path), "--map", str(map_path)], capsys)
    assert code == 0 and json.loads(out)["codim_after"] == 0


def test_verify_suite_deterministic(capsys):
    code, out1, _ = run(["verify", "--suite", "default", "--json"], capsys)
    assert code == 0
    code, out2, _ = run(["verify", "--suite", "default", "--json"], capsys)
    assert out1 == out2
    assert json.loads(out1)["pass"]


def test_glue_thin_collar_rejected(capsys):
    # with two layers the vertical edges of both layers get identified
    code, _, err = run(["glue", "--gen", "collar:circle:8:2:0.5"], capsys)
    assert code == 2
    assert "(0, 8)" in err


def test_verify_single_mesh(capsys):
    code, out, _ = run(["verify", "--gen", "disk:8"], capsys)
    assert code == 0


def test_verify_failure_exit_code(capsys):
    # an impossible residual tolerance makes checks fail without erroring
    code, _, err = run(["verify", "--gen", "disk:8", "--tol-res", "1e-300"], capsys)
    assert code == 1
    assert "FAIL" in err


@pytest.mark.parametrize("argv", [
    ["dn", "--gen", "torus:8"],
    ["dn", "--mesh", "/nonexistent/mesh.json"],
    ["dn", "--gen", "bogus:1"],
    ["verify", "--suite", "nope"],
    ["decompose", "--gen", "disk:8", "--degree", "5"],
])
def test_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert "error" in err


def test_malformed_mesh(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, _ = run(["dn", "--mesh", str(p)], capsys)
    assert code == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "abelym", "gen", "--circle", "4"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0
    assert load_mesh(r.stdout).n_simplices(1) == 4
