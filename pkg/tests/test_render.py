import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from qdflow.errors import EmptyScene
from qdflow.render import (SIZE, Curve, Marker, Scene, auto_viewport, render_svg, scene_from_graph)

NS = "{http://www.w3.org/2000/svg}"


def six_curve_scene():
    t = np.linspace(0, 1, 50)
    curves = [Curve(np.exp(2j * math.pi * k / 6) * (0.2 + t), "infinite") for k in range(6)]
    markers = [Marker(0.2 + 0j, "zero"), Marker(-0.2 + 0j, "zero"), Marker(0j, "pole")]
    return Scene(tuple(curves), tuple(markers))


def test_one_path_per_curve():
    root = ET.fromstring(render_svg(six_curve_scene()))
    paths = root.findall(f"{NS}path")
    assert len(paths) == 6
    assert all("trajectory" in p.get("class").split() for p in paths)


def test_markers():
    root = ET.fromstring(render_svg(six_curve_scene()))
    assert len(root.findall(f"{NS}circle")) == 2
    assert len(root.findall(f"{NS}line")) == 2          # the cross at the pole


def test_deterministic_bytes():
    assert render_svg(six_curve_scene()) == render_svg(six_curve_scene())


def test_coordinates_finite_and_inside():
    root = ET.fromstring(render_svg(six_curve_scene()))
    for p in root.findall(f"{NS}path"):
        for tok in p.get("d").replace("M", " ").replace("L", " ").split():
            x, y = (float(v) for v in tok.split(","))
            assert math.isfinite(x) and math.isfinite(y)
            assert -1e-6 <= x <= SIZE + 1e-6 and -1e-6 <= y <= SIZE + 1e-6


def test_y_axis_points_up():
    scene = Scene((Curve([0j, 1j], "short"),), (), viewport=(0.5j, 1.0))
    d = ET.fromstring(render_svg(scene)).find(f"{NS}path").get("d")
    (x0, y0), (x1, y1) = [map(float, t.split(",")) for t in d.replace("M", "").split(" L")]
    assert y1 < y0


def test_clipping_splits_paths():
    scene = Scene((Curve([-5 + 0j, 0j, 0.5j, 5 + 0.5j], "infinite"),), (), viewport=(0j, 1.0))
    d = ET.fromstring(render_svg(scene)).find(f"{NS}path").get("d")
    assert d.count("M") == 1
    scene = Scene((Curve([-0.5 + 0j, 5 + 0j, 5 + 0.5j, -0.5 + 0.5j], "infinite"),), (),
                  viewport=(0j, 1.0))
    d = ET.fromstring(render_svg(scene)).find(f"{NS}path").get("d")
    assert d.count("M") == 2


def test_auto_viewport_coverage():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=2000) + 1j * rng.normal(size=2000)
    pts[:3] = [1e6, -1e6j, 1e6 + 1e6j]                  # far outliers are dropped
    scene = Scene((Curve(pts),), (Marker(3 + 3j, "zero"),))
    c, h = auto_viewport(scene)
    inside = (np.abs(pts.real - c.real) <= h) & (np.abs(pts.imag - c.imag) <= h)
    assert inside.mean() >= 0.99
    assert abs(3 - c.real) <= h and abs(3 - c.imag) <= h
    assert h < 100


def test_empty_scene():
    with pytest.raises(EmptyScene):
        render_svg(Scene())


def test_bad_style_and_marker():
    with pytest.raises(ValueError):
        Curve([0, 1], "dotted")
    with pytest.raises(ValueError):
        Marker(0j, "star")


def test_family_scene_short_paths(family_graph):
    for A, count in ((3, 2), (-2 + 2j, 1)):
        root = ET.fromstring(render_svg(scene_from_graph(family_graph(A))))
        short = [p for p in root.findall(f"{NS}path") if "short" in p.get("class").split()]
        assert len(short) == count


def test_orthogonal_and_overlay(family_graph):
    from qdflow.quaddiff import VERTICAL, critical_graph
    g = family_graph(-2 + 2j)
    vg = critical_graph(g.qd, kind=VERTICAL)
    svg = render_svg(scene_from_graph(g, overlay_zeros=np.array([0.1 + 0.1j, 0.2j]), orthogonal=vg))
    root = ET.fromstring(svg)
    assert len([p for p in root.findall(f"{NS}path") if p.get("class") == "orthogonal"]) == 6
    assert len([c for c in root.findall(f"{NS}circle") if c.get("class") == "overlay"]) == 2
