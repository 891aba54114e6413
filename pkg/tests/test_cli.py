"""End-to-end command-line tests on deliberately tiny configurations."""

import os

import numpy as np
import pytest

from swimrom.cli import main
from swimrom.container import read_container


def _write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


_TINY_BACTERIUM = """
swimmer = bacterium
resolution = desk
mode = split
train_n = 3
train_r = 2
held_out = 3
seed = 11
pod_threshold = 0.999999999999
eim_threshold = 0.999999999999
"""


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("offline"))
    cfg = _write_config(tmp_path_factory.mktemp("cfg"), _TINY_BACTERIUM)
    assert main(["offline", "--config", cfg, "--out", out]) == 0
    return cfg, out


def test_validate_passes(capsys):
    assert main(["validate", "--resolution", "desk"]) == 0
    text = capsys.readouterr().out
    assert text.count("PASS") == 4
    assert "FAIL" not in text


def test_offline_writes_model_and_manifest(trained_run):
    _, out = trained_run
    for name in ("rom.manifest", "rom.bin", "snapshots.bin", "manifest.txt"):
        assert os.path.exists(os.path.join(out, name))
    snaps = read_container(os.path.join(out, "snapshots.bin"))
    assert snaps["parameters"].shape == (6, 2)
    manifest = open(os.path.join(out, "manifest.txt")).read()
    assert "config_sha256" in manifest
    assert "snapshot_collection" in manifest


def test_online_queries_and_determinism(trained_run, tmp_path):
    cfg, out = trained_run
    rom_prefix = os.path.join(out, "rom")
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    for o in (out1, out2):
        assert main(["online", "--config", cfg, "--out", o,
                     "--rom", rom_prefix, "--seed", "11"]) == 0
    csv1 = open(os.path.join(out1, "online.csv"), "rb").read()
    csv2 = open(os.path.join(out2, "online.csv"), "rb").read()
    assert csv1 == csv2
    header = csv1.decode().splitlines()[0].split(",")
    assert "eta" in header
    assert len(csv1.decode().splitlines()) == 4


def test_online_with_fom_verification(trained_run, tmp_path):
    cfg, out = trained_run
    o = str(tmp_path / "verified")
    assert main(["online", "--config", cfg, "--out", o,
                 "--rom", rom_prefix_of(out), "--verify", "fom",
                 "--seed", "3"]) == 0
    lines = open(os.path.join(o, "online.csv")).read().splitlines()
    assert lines[0].endswith("traction_rel_err")
    errs = [float(line.split(",")[-1]) for line in lines[1:]]
    assert all(np.isfinite(errs))


def rom_prefix_of(out):
    return os.path.join(out, "rom")


def test_stroke_reconstruction_runs(tmp_path):
    cfg = _write_config(tmp_path, """
swimmer = eukaryote
resolution = desk
frames = 16
pod_threshold = 0.999999999999
""")
    out = str(tmp_path / "stroke")
    assert main(["stroke", "--config", cfg, "--out", out]) == 0
    lines = open(os.path.join(out, "stroke_errors.csv")).read().splitlines()
    assert lines[0] == "n_training,l2_longitudinal_rel_err"
    n, err = lines[1].split(",")
    assert int(n) == 6 and float(err) < 0.5
    series = open(os.path.join(out, "stroke_series.csv")).read().splitlines()
    assert len(series) == 17


def test_export_vtk_and_operators(tmp_path):
    cfg = _write_config(tmp_path, "swimmer = bacterium\nresolution = desk\n")
    out = str(tmp_path / "export")
    assert main(["export", "--config", cfg, "--out", out]) == 0
    vtk = open(os.path.join(out, "surface.vtk")).read()
    assert vtk.startswith("# vtk DataFile")
    assert "VECTORS traction" in vtk
    assert "SCALARS traction_magnitude" in vtk
    ops = read_container(os.path.join(out, "operators.bin"))
    assert set(ops) == {"V", "K", "M", "P"}
    assert ops["V"].shape == ops["K"].shape


def test_unknown_config_key_fails(tmp_path, capsys):
    cfg = _write_config(tmp_path, "swimmmer = bacterium\n")
    assert main(["validate", "--config", cfg]) == 1
    assert "swimmmer" in capsys.readouterr().err


def test_bad_config_reports_error(tmp_path):
    cfg = _write_config(tmp_path, "train_n = many\n")
    rc = main(["offline", "--config", cfg, "--out", str(tmp_path / "x")])
    assert rc != 0
