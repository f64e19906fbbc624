import json
import subprocess
import sys

import pytest

from hydradiv.cayley import BallIndex
from hydradiv.cli import EXIT_BUDGET, EXIT_INVALID, EXIT_OK, main, read_config


def run(*argv):
    return main([str(a) for a in argv])


def test_ball_json(tmp_path, capsys):
    assert run("ball", "--height", 1, "--radius", 3) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["sphere_sizes"] == [1, 4, 8, 12] and out["ball_size"] == 25
    assert out["schema"] == "hydradiv/ball/1"


def test_divergence_antipodal_g1(tmp_path):
    out = tmp_path / "t.csv"
    assert run("divergence", "--height", 1, "--rmin", 2, "--rmax", 15, "--pairs", "antipodal", "--out", out) == EXIT_OK
    rows = out.read_text().splitlines()
    assert rows[0] == "d,r,pair,length,certified,p_d,q_d_comb,R_cap"
    assert len(rows) == 15
    for line in rows[1:]:
        d, r, pair, length, cert = line.split(",")[:5]
        assert int(length) == 4 * int(r) and cert == "true" and pair == "antipodal"
    svg = (tmp_path / "t.svg").read_text()
    assert svg.startswith("<svg") and "polyline" in svg


def test_divergence_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("divergence", "--height", 2, "--rmin", 1, "--rmax", 2, "--pairs", "sample=4",
                   "--seed", 3, "--out", out) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


@pytest.mark.parametrize("argv", [
    ("divergence", "--height", 1, "--rmin", 5, "--rmax", 2),
    ("divergence", "--height", 1, "--rmin", 2),
    ("divergence", "--height", 1, "--rmin", 1, "--rmax", 2, "--pairs", "nope"),
    ("ball", "--height", 0, "--radius", 2),
    ("ball", "--height", 2, "--radius", -1),
    ("ball", "--height", 2, "--radius", 2, "--center", "a7"),
    ("build-detour", "--height", 2, "--radius", 3, "--p", "a2"),
    ("hyperplane", "--height", 2, "--radius", 3, "--edge", "a0,2"),
    ("verify", "--suite", "other"),
    ("no-such-command",),
])
def test_invalid_input_exit_code(argv):
    assert run(*argv) == EXIT_INVALID


def test_budget_exit_code(tmp_path):
    out = tmp_path / "b.csv"
    assert run("divergence", "--height", 2, "--rmin", 4, "--rmax", 4, "--budget", 1000, "--out", out) == EXIT_BUDGET
    assert out.read_text().splitlines()[1] == "2,4,corner,,false,3,354,"
    assert run("ball", "--height", 2, "--radius", 9, "--budget", 100) == EXIT_BUDGET


def test_config_file_and_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("# defaults\nheight = 1\nradius = 2\n")
    assert read_config(conf) == {"height": "1", "radius": "2"}
    assert run("--config", conf, "ball") == EXIT_OK
    assert json.loads(capsys.readouterr().out)["sphere_sizes"] == [1, 4, 8]
    assert run("--config", conf, "ball", "--radius", 1) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["sphere_sizes"] == [1, 4]
    bad = tmp_path / "bad.conf"
    bad.write_text("radius 3\n")
    assert run("--config", bad, "ball") == EXIT_INVALID


def test_cache_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("HYDRADIV_CACHE", str(tmp_path))
    assert run("ball", "--height", 2, "--radius", 3) == EXIT_OK
    files = list(tmp_path.iterdir())
    assert len(files) == 1 and files[0].name.startswith("ball_d2_R3_")
    first = capsys.readouterr().out
    assert run("ball", "--height", 2, "--radius", 3) == EXIT_OK
    assert capsys.readouterr().out == first


def test_build_detour_json(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run("build-detour", "--height", 3, "--radius", 3, "--out", out) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert rep["verification"]["avoids_ball"] and rep["verification"]["within_bound"]
    assert rep["P"] == "a3^3" and rep["Q"] == "a0^3"
    assert len(rep["vertices"]) == rep["verification"]["length"] + 1


def test_build_detour_custom_q(tmp_path):
    out = tmp_path / "q.json"
    assert run("build-detour", "--height", 2, "--radius", 2, "--q", "a1^-2", "--out", out) == EXIT_OK
    assert json.loads(out.read_text())["Q"] == "a1^-2"


def test_hyperplane_command(capsys):
    assert run("hyperplane", "--height", 2, "--radius", 5, "--edge", ",2,1") == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["height"] == 2 and not out["partial"]
    assert out["separation"][0]["level2"] is True
    assert out["smooth_trace"]["letters"].startswith("a0")


def test_classify_command(capsys):
    assert run("classify", "--height", 2, "--radius", 3, "--start", "a2", "--path", "A2 a1 a2") == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["legal_shortcut_level"] == 1 and out["geodesic"] is True and out["shortcut"] is True


def test_export(tmp_path):
    csv_out, bin_out = tmp_path / "b.csv", tmp_path / "b.bin"
    assert run("export", "--height", 2, "--radius", 2, "--out", csv_out) == EXIT_OK
    lines = csv_out.read_text().splitlines()
    assert lines[0] == "id,distance,encoding,word" and len(lines) == 1 + 29
    assert run("export", "--height", 2, "--radius", 2, "--format", "bin", "--out", bin_out) == EXIT_OK
    assert BallIndex.from_bytes(bin_out.read_bytes()).sphere_sizes() == [1, 6, 22]


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "hydradiv.cli", "ball", "--height", "1", "--radius", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and json.loads(res.stdout)["ball_size"] == 13
