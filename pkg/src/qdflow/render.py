"""Deterministic SVG output for critical graphs and zero overlays."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptyScene

SIZE = 800
MARGIN = 0.10
COVER = 0.0025          # per-axis quantile trimmed on each side by the auto viewport

STYLE_CLASSES = {
    "short": "trajectory short",
    "infinite": "trajectory infinite",
    "orthogonal": "orthogonal",
    "foliation": "foliation",
}

CSS = (
    ".trajectory{fill:none;stroke:#1f3b73;stroke-linejoin:round}"
    ".trajectory.short{stroke:#b2182b;stroke-width:2.5}"
    ".trajectory.infinite{stroke-width:1}"
    ".orthogonal{fill:none;stroke:#4d4d4d;stroke-width:1;stroke-dasharray:6 4}"
    ".foliation{fill:none;stroke:#9ecae1;stroke-width:0.6}"
    ".zero{fill:#000000}"
    ".pole{stroke:#000000;stroke-width:2}"
    ".overlay{fill:#1a9850}"
)


@dataclass(frozen=True)
class Curve:
    points: np.ndarray
    style: str = "infinite"

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=complex).ravel())
        if self.style not in STYLE_CLASSES:
            raise ValueError(f"unknown curve style {self.style!r}")


@dataclass(frozen=True)
class Marker:
    point: complex
    kind: str            # zero | pole | overlay_zero

    def __post_init__(self):
        if self.kind not in ("zero", "pole", "overlay_zero"):
            raise ValueError(f"unknown marker kind {self.kind!r}")


@dataclass(frozen=True)
class Scene:
    curves: Sequence[Curve] = field(default_factory=tuple)
    markers: Sequence[Marker] = field(default_factory=tuple)
    viewport: Optional[tuple] = None     # (center, half_width) or None for auto
    title: str = ""


def auto_viewport(scene: Scene):
    """Square window around all markers and the central 99.5% of curve points per axis."""
    pts = [c.points for c in scene.curves if c.points.size]
    xs_lo, xs_hi, ys_lo, ys_hi = [], [], [], []
    if pts:
        allp = np.concatenate(pts)
        allp = allp[np.isfinite(allp)]
        if allp.size:
            xs_lo.append(np.quantile(allp.real, COVER))
            xs_hi.append(np.quantile(allp.real, 1 - COVER))
            ys_lo.append(np.quantile(allp.imag, COVER))
            ys_hi.append(np.quantile(allp.imag, 1 - COVER))
    for m in scene.markers:
        xs_lo.append(m.point.real)
        xs_hi.append(m.point.real)
        ys_lo.append(m.point.imag)
        ys_hi.append(m.point.imag)
    x0, x1, y0, y1 = min(xs_lo), max(xs_hi), min(ys_lo), max(ys_hi)
    half = 0.5 * max(x1 - x0, y1 - y0, 1e-9) * (1 + 2 * MARGIN)
    return complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), half


def _clip(p, q, lo, hi):
    # Liang-Barsky on the box [lo, hi] (complex corners); None if outside
    dx, dy = q.real - p.real, q.imag - p.imag
    t0, t1 = 0.0, 1.0
    for den, num in ((-dx, p.real - lo.real), (dx, hi.real - p.real),
                     (-dy, p.imag - lo.imag), (dy, hi.imag - p.imag)):
        if den == 0:
            if num < 0:
                return None
            continue
        t = num / den
        if den < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return complex(p.real + t0 * dx, p.imag + t0 * dy), complex(p.real + t1 * dx, p.imag + t1 * dy), t0, t1


def _fmt(v: float) -> str:
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


class _Frame:
    def __init__(self, center: complex, half: float):
        self.lo = center - half * (1 + 1j)
        self.hi = center + half * (1 + 1j)
        self.k = SIZE / (2 * half)

    def xy(self, z: complex) -> str:
        return f"{_fmt((z.real - self.lo.real) * self.k)},{_fmt((self.hi.imag - z.imag) * self.k)}"

    def subpaths(self, pts: np.ndarray):
        out, cur = [], []
        for p, q in zip(pts[:-1], pts[1:]):
            p, q = complex(p), complex(q)
            if not (np.isfinite(p) and np.isfinite(q)):
                continue
            c = _clip(p, q, self.lo, self.hi)
            if c is None:
                if cur:
                    out.append(cur)
                    cur = []
                continue
            a, b, t0, t1 = c
            if not cur or t0 > 0:
                if cur:
                    out.append(cur)
                cur = [a]
            cur.append(b)
            if t1 < 1:
                out.append(cur)
                cur = []
        if cur:
            out.append(cur)
        return out


def render_svg(scene: Scene) -> bytes:
    """SVG 1.1 document: one <path> per curve, markers for the critical points."""
    if not scene.curves and not scene.markers:
        raise EmptyScene("nothing to draw")
    center, half = scene.viewport if scene.viewport is not None else auto_viewport(scene)
    center = complex(center)
    frame = _Frame(center, float(half))
    lines = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
    ]
    if scene.title:
        lines.append(f"<title>{escape(scene.title)}</title>")
    lines.append(f"<style>{CSS}</style>")
    lines.append(f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>')
    for curve in scene.curves:
        parts = frame.subpaths(curve.points)
        d = " ".join("M" + " L".join(frame.xy(z) for z in sub) for sub in parts if len(sub) > 1)
        lines.append(f'<path class="{STYLE_CLASSES[curve.style]}" d="{d}"/>')
    for m in scene.markers:
        z = complex(m.point)
        if not (frame.lo.real <= z.real <= frame.hi.real and frame.lo.imag <= z.imag <= frame.hi.imag):
            continue
        x, y = (float(v) for v in frame.xy(z).split(","))
        if m.kind == "zero":
            lines.append(f'<circle class="zero" cx="{_fmt(x)}" cy="{_fmt(y)}" r="5"/>')
        elif m.kind == "overlay_zero":
            lines.append(f'<circle class="overlay" cx="{_fmt(x)}" cy="{_fmt(y)}" r="2"/>')
        else:
            s = 7.0
            lines.append(f'<line class="pole" x1="{_fmt(x - s)}" y1="{_fmt(y - s)}" '
                         f'x2="{_fmt(x + s)}" y2="{_fmt(y + s)}"/>')
            lines.append(f'<line class="pole" x1="{_fmt(x - s)}" y1="{_fmt(y + s)}" '
                         f'x2="{_fmt(x + s)}" y2="{_fmt(y - s)}"/>')
    lines.append("</svg>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _pt(v) -> complex:
    return complex(float(v[0]), float(v[1]))


def scene_from_document(doc: dict, overlay: bool = True) -> Scene:
    """Scene for a graph document (the JSON written by the command line).

    Short trajectories are drawn once; the traces that are their halves are
    skipped, so every drawn curve is a distinct trajectory.
    """
    params = doc["params"]
    halves = set()
    curves = []
    for st in doc.get("short_trajectories", []):
        halves.add(st["index"])
        if st.get("partner") is not None:
            halves.add(st["partner"])
        curves.append(Curve(np.array([_pt(p) for p in st["points"]]), "short"))
    for i, t in enumerate(doc.get("trajectories", [])):
        if i in halves:
            continue
        curves.append(Curve(np.array([_pt(p) for p in t["points"]]), "infinite"))
    for t in doc.get("orthogonal", []):
        curves.append(Curve(np.array([_pt(p) for p in t["points"]]), "orthogonal"))
    for t in doc.get("foliation", []):
        curves.append(Curve(np.array([_pt(p) for p in t["points"]]), "foliation"))
    markers = [Marker(_pt(params["a"]), "zero"), Marker(_pt(params["b"]), "zero"), Marker(0j, "pole")]
    if overlay and "overlay" in doc:
        markers += [Marker(_pt(p), "overlay_zero") for p in doc["overlay"]["zeros"]]
    vp = doc.get("viewport")
    viewport = (_pt(vp["center"]), float(vp["half_width"])) if vp else None
    return Scene(tuple(curves), tuple(markers), viewport, doc.get("title", ""))


def scene_from_graph(graph, overlay_zeros=None, orthogonal=None) -> Scene:
    """Scene for a CriticalGraph (optionally with zeros and a vertical graph)."""
    doc = graph.to_dict()
    if overlay_zeros is not None:
        doc["overlay"] = {"zeros": [[z.real, z.imag] for z in np.asarray(overlay_zeros).tolist()]}
    if orthogonal is not None:
        doc["orthogonal"] = [t.to_dict() for t in orthogonal.trajectories]
    return scene_from_document(doc)
