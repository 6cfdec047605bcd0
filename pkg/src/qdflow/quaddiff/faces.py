"""Teichmüller sum rule on faces bounded by critical trajectories."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import OpenBoundary
from .graph import CriticalGraph

FACE_TOL = 0.05
CLOSE_TOL = 1e-6

# multiplicities of the critical points: simple zeros +1, the poles -4 and -2
MULTIPLICITY = {"a": 1, "b": 1, "origin": -4, "infinity": -2}


@dataclass(frozen=True)
class Corner:
    label: str
    point: complex
    angle: float
    multiplicity: int


@dataclass(frozen=True)
class FaceReport:
    boundary: tuple                      # ((trajectory index, reversed), ...)
    corners: tuple                       # Corner
    interior: tuple                      # labels of critical points inside
    interior_multiplicity_sum: int
    sum_rule_residual: float
    orientation: str                     # of the boundary around the face
    notes: tuple = field(default=())

    @property
    def corner_angles(self):
        return [c.angle for c in self.corners]

    @property
    def corner_multiplicities(self):
        return [c.multiplicity for c in self.corners]

    @property
    def valid(self) -> bool:
        return self.sum_rule_residual < FACE_TOL

    def to_dict(self):
        return {
            "boundary": [list(b) for b in self.boundary],
            "corners": [{"label": c.label, "point": [c.point.real, c.point.imag],
                         "angle": c.angle, "multiplicity": c.multiplicity} for c in self.corners],
            "interior": list(self.interior),
            "interior_multiplicity_sum": self.interior_multiplicity_sum,
            "sum_rule_residual": self.sum_rule_residual,
            "valid": self.valid,
        }


def sum_rule_residual(angles: Sequence[float], multiplicities: Sequence[int], interior_sum: int) -> float:
    """|sum(1 - theta_j (n_j + 2) / 2 pi) - 2 - sum n_i|."""
    lhs = math.fsum(1.0 - t * (n + 2) / (2.0 * math.pi) for t, n in zip(angles, multiplicities))
    return abs(lhs - 2.0 - interior_sum)


def _piece(graph: CriticalGraph, index: int, reverse: bool) -> np.ndarray:
    traj = graph.trajectories[index]
    pts = traj.points
    if traj.endpoint.kind == "to_origin":
        pts = np.append(pts, 0j)
    elif traj.endpoint.kind not in ("hits_zero", "closed"):
        raise OpenBoundary(f"trajectory {index} does not end at a finite critical point "
                           f"({traj.endpoint.kind})")
    return pts[::-1] if reverse else pts


def _label(graph: CriticalGraph, p: complex) -> str:
    qd = graph.qd
    tol = CLOSE_TOL * qd.scale
    for lab, z in (("a", qd.a), ("b", qd.b), ("origin", 0j)):
        if abs(p - z) <= tol:
            return lab
    raise OpenBoundary(f"face corner {p!r} is not a critical point")


def _chord_point(pts: np.ndarray, vertex: complex, r: float) -> complex:
    """First point of the polyline at distance r from vertex (linear interpolation)."""
    d = np.abs(pts - vertex)
    k = int(np.argmax(d >= r))
    if d[k] < r:
        raise OpenBoundary("boundary piece too short to measure a corner angle")
    if k == 0:
        return complex(pts[0])
    t = (r - d[k - 1]) / (d[k] - d[k - 1])
    return complex(pts[k - 1] + t * (pts[k] - pts[k - 1]))


def _winding(poly: np.ndarray, p: complex) -> float:
    v = poly - p
    ang = np.angle(v[1:] / v[:-1])
    return float(ang.sum() / (2.0 * math.pi))


def validate_face(graph: CriticalGraph, pieces, contains_infinity: bool = False,
                  radius: Optional[float] = None, angle_offsets=None) -> FaceReport:
    """Check the Teichmüller sum rule on a face of the critical graph.

    Parameters
    ----------
    graph : CriticalGraph
    pieces : sequence of (index, reversed)
        Trajectories (indices into ``graph.trajectories``) that bound the face,
        in cyclic order; ``reversed`` flips a piece so that it starts where the
        previous one ended.  Trajectories ending at the origin are closed off
        at 0.
    contains_infinity : bool
        The face is the unbounded side of the boundary curve.
    radius : float, optional
        Chord radius for the corner angles (default ``1e-4 * scale``).
    angle_offsets : sequence of float, optional
        Added to the measured corner angles (for perturbation tests).

    Raises
    ------
    OpenBoundary
        if consecutive pieces do not meet within 1e-6 (relative to the scale).
    """
    qd = graph.qd
    scale = qd.scale
    r = radius if radius is not None else 1e-4 * scale
    polys = [_piece(graph, i, bool(rev)) for i, rev in pieces]
    if not polys:
        raise OpenBoundary("empty face boundary")
    n = len(polys)
    for k in range(n):
        gap = abs(polys[k][-1] - polys[(k + 1) % n][0])
        if gap > CLOSE_TOL * scale:
            raise OpenBoundary(f"pieces {k} and {(k + 1) % n} are {gap:.3g} apart")

    loop = np.concatenate([p[:-1] for p in polys] + [polys[0][:1]])
    area = 0.5 * float(np.sum(loop[:-1].real * loop[1:].imag - loop[1:].real * loop[:-1].imag))
    # the face lies to the left of a counterclockwise curve around a bounded face
    left = (area > 0) != contains_infinity

    corners = []
    for k in range(n):
        incoming, outgoing = polys[k - 1], polys[k]
        vertex = outgoing[0]
        lab = _label(graph, vertex)
        vertex = {"a": qd.a, "b": qd.b, "origin": 0j}[lab]
        p_in = _chord_point(incoming[::-1], vertex, r)
        p_out = _chord_point(outgoing, vertex, r)
        d_in = cmath.phase(p_in - vertex)
        d_out = cmath.phase(p_out - vertex)
        theta = (d_in - d_out) % (2 * math.pi) if left else (d_out - d_in) % (2 * math.pi)
        corners.append(Corner(lab, vertex, theta, MULTIPLICITY[lab]))
    if angle_offsets is not None:
        corners = [Corner(c.label, c.point, c.angle + float(o), c.multiplicity)
                   for c, o in zip(corners, angle_offsets)]

    on_boundary = {c.label for c in corners}
    inside = []
    for lab, z in (("a", qd.a), ("b", qd.b), ("origin", 0j)):
        if lab in on_boundary:
            continue
        w = round(_winding(loop, z))
        if (w != 0) != contains_infinity:
            inside.append(lab)
    if contains_infinity:
        inside.append("infinity")
    interior_sum = sum(MULTIPLICITY[lab] for lab in inside)
    residual = sum_rule_residual([c.angle for c in corners],
                                 [c.multiplicity for c in corners], interior_sum)
    return FaceReport(tuple((int(i), bool(rev)) for i, rev in pieces), tuple(corners),
                      tuple(inside), interior_sum, residual,
                      "counterclockwise" if area > 0 else "clockwise")
