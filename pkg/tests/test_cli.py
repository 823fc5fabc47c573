import subprocess
import sys

import pytest

from twistspin import io
from twistspin.cli import EXIT_GENERIC, EXIT_IO, EXIT_OK, EXIT_VALIDATION

from support import pipeline, run


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    assert run("build", "--n", 2, "--m", 24, "--out", out) == EXIT_OK
    return out


def test_build_outputs(built):
    audit = io.read_json(built / "audit.json")
    assert audit["euler_characteristic"] == 2
    assert audit["closed"] and audit["orientable"] and audit["embedded"]
    assert audit["symmetry"]["exact_on_vertices"]
    doc = io.read_json(built / "surface.json")
    assert set(doc) == {"surface", "arc", "ball"}
    assert doc["surface"]["meta"] == {"n": 2, "m": 24, "arc_vertices": 60}


def test_build_rejects_bad_resolution(tmp_path, capsys):
    assert run("build", "--n", 2, "--m", 47, "--out", tmp_path) == EXIT_VALIDATION
    assert "multiple" in capsys.readouterr().err


def test_project_and_slice(built, capsys):
    assert run("project", "--perturb", "1e-6", "--out", built) == EXIT_OK
    summary = io.read_json(built / "singularity.json")["summary"]
    assert summary["triple_point_count"] >= 4 and summary["sheet_count"] >= 4
    assert (built / "diagram.obj").exists()
    assert run("slice", "--family", "horizontal", "--frames", 21, "--out", built) == EXIT_OK
    pic = io.read_json(built / "picture_horizontal.json")
    assert len(pic["frames"]) == len(pic["frame_diagrams"]) == 21
    assert pic["source"] == "surface.json"
    assert len(list((built / "frames_horizontal").glob("frame_*.svg"))) == 21
    capsys.readouterr()
    assert run("analyze", "--family", "horizontal", "--out", built) == EXIT_OK
    text = capsys.readouterr().out
    assert "morse balance=2" in text
    assert "period 2π/2 confirmed" in text
    rep = io.read_json(built / "report_horizontal.json")
    assert rep["normal_form"]["ok"] is False


def test_radial_pipeline(tmp_path, capsys):
    assert run("build", "--n", 2, "--m", 24, "--out", tmp_path) == EXIT_OK
    assert run("project", "--out", tmp_path) == EXIT_OK
    assert run("slice", "--family", "radial", "--frames", 8, "--out", tmp_path) == EXIT_OK
    capsys.readouterr()
    assert run("analyze", "--family", "radial", "--out", tmp_path) == EXIT_OK
    assert "period π confirmed by signatures" in capsys.readouterr().out
    assert "normal_form" not in io.read_json(tmp_path / "report_radial.json")


def test_export_formats(built, tmp_path):
    assert run("export", "--source", built / "surface.json", "--format", "obj", "--out", tmp_path) == EXIT_OK
    V, T = io.read_obj(tmp_path / "surface.obj")
    assert len(T) == len(io.read_json(built / "surface.json")["surface"]["triangles"])
    assert run("export", "--source", built / "surface.json", "--format", "json", "--out", tmp_path) == EXIT_OK
    assert io.read_json(tmp_path / "surface.json") == io.read_json(built / "surface.json")
    assert run("slice", "--family", "vertical", "--frames", 5, "--out", built) == EXIT_OK
    src = built / "picture_vertical.json"
    assert run("export", "--source", src, "--format", "svg", "--out", tmp_path) == EXIT_OK
    assert len(list((tmp_path / "picture_vertical_svg").glob("*.svg"))) == 5
    assert run("export", "--source", src, "--format", "obj", "--out", tmp_path) == EXIT_VALIDATION


def test_genericity_exit_code(tmp_path, capsys):
    assert run("build", "--arc", "unknot", "--m", 16, "--out", tmp_path) == EXIT_OK
    assert run("project", "--drop", "x", "--out", tmp_path) == EXIT_GENERIC
    assert "--perturb" in capsys.readouterr().err
    assert run("project", "--drop", "y", "--out", tmp_path) == EXIT_OK
    s = io.read_json(tmp_path / "singularity.json")["summary"]
    assert (s["double_curve_count"], s["triple_point_count"], s["branch_point_count"], s["sheet_count"]) == (0, 0, 0, 1)


def test_io_exit_code(tmp_path, capsys):
    assert run("project", "--surface", tmp_path / "missing.json", "--out", tmp_path) == EXIT_IO
    (tmp_path / "bad.json").write_text("{not json")
    assert run("slice", "--source", tmp_path / "bad.json", "--out", tmp_path) == EXIT_IO
    assert "I/O failure" in capsys.readouterr().err


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("TWISTSPIN_OUT", str(tmp_path / "envout"))
    assert run("build", "--m", 16, "--samples", 40) == EXIT_OK
    assert (tmp_path / "envout" / "surface.json").exists()


def test_byte_identical_reruns(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    pipeline(a)
    pipeline(b)
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    assert len([f for f in files if f.suffix == ".json"]) >= 8
    for rel in files:
        assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "twistspin.cli", "build", "--m", "16", "--samples", "40",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("chi=2 closed=True orientable=True embedded=True")
