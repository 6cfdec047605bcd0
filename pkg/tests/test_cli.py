import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from qdflow.cli import main, parse_complex
from qdflow.render import render_svg, scene_from_document

GOLDEN = Path(__file__).parent / "golden"


def run(*args):
    return main([str(a) for a in args])


def test_parse_complex():
    assert parse_complex("-2,-1") == -2 - 1j
    assert parse_complex("3") == 3
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        parse_complex("1,2,3")


def test_graph_figure_parameters(tmp_path):
    out_json, out_svg = tmp_path / "g.json", tmp_path / "g.svg"
    assert run("graph", "--lambda2", "-2,-1", "--a", "1,-1", "--b", "0,1",
               "--svg", out_svg, "--json", out_json) == 0
    doc = json.loads(out_json.read_text())
    assert doc["schema"] == "qdflow/1"
    assert set(doc["gate"]) == {"v_plus", "v_minus", "exists", "branch"}
    assert out_svg.read_bytes().startswith(b"<?xml")


def test_graph_with_short_trajectory(tmp_path):
    out = tmp_path / "g.json"
    assert run("graph", "--lambda", "0,1", "--a", "1,0", "--b", "4,0", "--json", out) == 0
    assert json.loads(out.read_text())["short_trajectories"]


def test_graph_degenerate(capsys):
    assert run("graph", "--lambda", "1,0", "--a", "1,0", "--b", "1,0") == 2
    assert "a=b" in capsys.readouterr().err


def test_lambda_flags_exclusive():
    with pytest.raises(SystemExit):
        run("graph", "--lambda", "1,0", "--lambda2", "1,0", "--a", "1,0", "--b", "2,0")


def test_family_counts(tmp_path):
    out = tmp_path / "f.json"
    assert run("family", "--A", "3,0", "--json", out) == 0
    assert len(json.loads(out.read_text())["short_trajectories"]) == 2


def test_family_overlay(tmp_path):
    out = tmp_path / "f.json"
    assert run("family", "--A", "-2,2", "--overlay-n", 60, "--json", out) == 0
    doc = json.loads(out.read_text())
    assert len(doc["short_trajectories"]) == 1
    assert len(doc["overlay"]["zeros"]) == 60
    assert doc["overlay"]["mean_dist"] < doc["overlay"]["max_dist"]


def test_family_verify_flag(tmp_path):
    out = tmp_path / "f.json"
    assert run("family", "--A", "3,0", "--verify", "--json", out) == 0
    rows = json.loads(out.read_text())["verify"]
    assert len(rows) == 3 and all(r["decreasing"] for r in rows)


def test_family_degenerate():
    assert run("family", "--A", "-1,0") == 2


def test_motherbody(tmp_path):
    out = tmp_path / "m.json"
    assert run("motherbody", "--p", "-3,0", "--q", "-1,0", "--r", "-4,0", "--json", out) == 0
    doc = json.loads(out.read_text())
    assert sorted(m[0] for m in doc["masses"]) == pytest.approx([-4, 1])
    assert doc["real_mass_exists"]
    masses = sorted(d["total_mass"] for d in doc["densities"])
    assert masses[0] == pytest.approx(1, abs=1e-3)


def test_motherbody_degenerate():
    assert run("motherbody", "--p", "0,2", "--q", "1,0", "--r", "-1,0") == 2


def test_verify_periods(capsys):
    assert run("verify", "--suite", "periods", "--samples", 100, "--seed", 7) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_verify_bessel(capsys):
    assert run("verify", "--suite", "bessel") == 0
    out = capsys.readouterr().out
    for word in ("recurrence", "ode", "laguerre"):
        assert word in out


def test_optional_layers(tmp_path):
    out = tmp_path / "f.json"
    assert run("family", "--A", "3,0", "--orthogonal", "--foliation", 3, "--json", out) == 0
    doc = json.loads(out.read_text())
    assert len(doc["orthogonal"]) == 6 and 0 < len(doc["foliation"]) <= 9


def test_json_round_trip(tmp_path):
    out_json, out_svg = tmp_path / "f.json", tmp_path / "f.svg"
    assert run("family", "--A", "-2,2", "--overlay-n", 20, "--json", out_json, "--svg", out_svg) == 0
    again = render_svg(scene_from_document(json.loads(out_json.read_text())))
    assert again == out_svg.read_bytes()


@pytest.mark.parametrize("A,name", [("3,0", "family_3.svg"), ("-2,2", "family_m2p2i.svg")])
def test_golden_svg(tmp_path, A, name):
    out = tmp_path / name
    assert run("family", "--A", A, "--svg", out) == 0
    if os.environ.get("QDFLOW_UPDATE_GOLDEN"):
        (GOLDEN / name).write_bytes(out.read_bytes())
    assert out.read_bytes() == (GOLDEN / name).read_bytes()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qdflow", "family", "--A", "-1,0"],
                       capture_output=True, text=True)
    assert r.returncode == 2
