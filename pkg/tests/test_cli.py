import json
import os
import subprocess
import sys

import pytest

from cmclab import cli

FAST = {
    "catenoid": ["--n-samples", "201"],
    "delaunay-sweep": ["--emin", "0.9", "--emax", "1.1", "--n", "3"],
    "nullity": ["--nmax", "3", "--steps", "400"],
    "foliation-certificate": ["--samples", "1001"],
    "disk": ["--resolution", "0.1", "--kmax", "3"],
    "flux": ["--ns", "201", "--ntheta", "32"],
    "extend": ["--nz", "4"],
    "mesh": ["--ns", "21", "--ntheta", "16"],
}

ARTIFACTS = {
    "catenoid": {"critical_catenoid.json", "critical_catenoid_profile.csv"},
    "delaunay-sweep": {"delaunay_sweep.csv"},
    "nullity": {"nullity.json"},
    "foliation-certificate": {"foliation_certificate.json"},
    "disk": {"disk_radial.csv", "disk_summary.json", "disk_foliation.csv"},
    "flux": {"flux.csv"},
    "extend": {"extension.csv"},
    "mesh": {"mesh.obj"},
}


def run(argv, tmp_path=None, env=None):
    if tmp_path is not None:
        argv = argv + ["--output-dir", str(tmp_path)]
    return cli.main(argv)


@pytest.mark.parametrize("cmd", sorted(FAST))
def test_commands(cmd, tmp_path):
    assert run([cmd] + FAST[cmd], tmp_path) == 0
    files = {p.name for p in tmp_path.iterdir()}
    assert files == ARTIFACTS[cmd] | {"manifest.json"}
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert set(man) == {"tool", "version", "command", "parameters", "grid", "kernel_backend",
                        "derived_constants", "tolerances", "artifacts"}
    assert set(man["artifacts"]) == ARTIFACTS[cmd]
    assert set(man["derived_constants"]) == {"z1", "c", "c1", "s1", "s_star", "r_c"}
    assert man["derived_constants"]["z1"] == pytest.approx(1.1996786402577338, abs=1e-14)


def test_nullity_output(tmp_path):
    assert run(["nullity", "--nmax", "3"], tmp_path) == 0
    d = json.loads((tmp_path / "nullity.json").read_text())
    assert d["total"] == 2


def test_certificate_output(tmp_path):
    assert run(["foliation-certificate"], tmp_path) == 0
    d = json.loads((tmp_path / "foliation_certificate.json").read_text())
    assert d["c1"] == pytest.approx(-0.15231573766295122, abs=1e-14)
    assert d["max_value"] < -0.15


def test_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["disk"] + FAST["disk"], d) == 0
    for p in a.iterdir():
        assert p.read_bytes() == (b / p.name).read_bytes()


def test_bad_value_names_key(tmp_path, capsys):
    assert run(["nullity", "--nmax", "1"], tmp_path) == 2
    assert "nmax" in capsys.readouterr().err


def test_bad_surface(tmp_path, capsys):
    assert run(["flux", "--surface", "torus"], tmp_path) == 2
    assert "surface" in capsys.readouterr().err


@pytest.mark.parametrize("raw,key", [
    ({"command": "disk", "parameters": {"bogus": 1}}, "bogus"),
    ({"command": "disk", "colour": "red"}, "colour"),
    ({"command": "disk", "grid": {"kmax": 3}}, "kmax"),
    ({"command": "disk", "parameters": {"n": "two"}}, "n"),
    ({"command": "spin"}, "command"),
])
def test_config_errors(tmp_path, capsys, raw, key):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(raw))
    assert run(["--config", str(cfg)], tmp_path / "o") == 2
    assert key in capsys.readouterr().err


def test_invalid_json(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{")
    assert run(["--config", str(cfg)], tmp_path / "o") == 2


def test_no_command():
    assert cli.main([]) == 2


def test_sweep_with_failures(tmp_path):
    assert run(["delaunay-sweep", "--emin", "0.1", "--emax", "0.3", "--n", "3"], tmp_path) == 3
    assert (tmp_path / "delaunay_sweep.csv").exists()


def test_output_dir_under_file(tmp_path):
    (tmp_path / "f").write_text("")
    assert run(["mesh"] + FAST["mesh"], tmp_path / "f" / "out") == 1


def test_missing_input(tmp_path):
    assert run(["extend", "--input", str(tmp_path / "nope.csv")], tmp_path) == 1


def test_extend_input(tmp_path):
    src = tmp_path / "h.csv"
    src.write_text("x,value\n" + "".join(f"{i / 10},{i / 10}\n" for i in range(11)))
    assert run(["extend", "--input", str(src), "--zmax", "0.2", "--nz", "2"], tmp_path / "o") == 0
    assert run(["extend", "--input", str(src), "--dim", "2"], tmp_path / "p") == 2


def test_config_precedence(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "disk", "output_dir": str(tmp_path / "from_file"),
                               "parameters": {"n": 3, "kmax": 2}, "grid": {"resolution": 0.25}}))
    monkeypatch.setenv("CMC_LAB_OUT", str(tmp_path / "from_env"))
    assert cli.main(["--config", str(cfg), "disk", "--n", "4"]) == 0
    man = json.loads((tmp_path / "from_env" / "manifest.json").read_text())
    assert man["parameters"]["n"] == 4 and man["parameters"]["kmax"] == 2
    assert man["parameters"]["resolution"] == 0.25
    assert not (tmp_path / "from_file").exists()
    assert cli.main(["--config", str(cfg), "--output-dir", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "manifest.json").exists()


def test_command_conflict(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "disk"}))
    assert cli.main(["--config", str(cfg), "mesh"]) == 2


def test_console_script(tmp_path):
    env = dict(os.environ, CMC_LAB_OUT=str(tmp_path))
    p = subprocess.run([sys.executable, "-m", "cmclab", "mesh", "--ns", "5", "--ntheta", "8"],
                       env=env, capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert (tmp_path / "mesh.obj").exists()
