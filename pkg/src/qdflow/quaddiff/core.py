"""The quadratic differential lambda^2 (z-a)(z-b) / z^4 dz^2 and its closed-form data."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from ..cxnum import Path, TrackedSqrt, as_complex, integrate_path, nearest_root
from ..errors import DegenerateParameters

DEGENERACY_EPS = 1e-10
INFINITY = "infinity"


@dataclass(frozen=True)
class QuadDiff:
    lam: complex
    a: complex
    b: complex

    def __post_init__(self):
        lam, a, b = (as_complex(v) for v in (self.lam, self.a, self.b))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        bad = []
        if abs(lam) < DEGENERACY_EPS:
            bad.append("lambda=0")
        if abs(a) < DEGENERACY_EPS:
            bad.append("a=0")
        if abs(b) < DEGENERACY_EPS:
            bad.append("b=0")
        if abs(a - b) < DEGENERACY_EPS * max(1.0, abs(a), abs(b)):
            bad.append("a=b")
        if bad:
            raise DegenerateParameters(bad)

    @classmethod
    def from_lambda2(cls, lam2, a, b) -> "QuadDiff":
        """Build from lambda^2 using the principal square root."""
        return cls(cmath.sqrt(as_complex(lam2)), a, b)

    @property
    def scale(self) -> float:
        """Length scale used for all relative tolerances."""
        return max(1.0, abs(self.a), abs(self.b))

    def zero(self, label: str) -> complex:
        return {"a": self.a, "b": self.b}[label]

    def phi(self, z):
        return self.lam ** 2 * (z - self.a) * (z - self.b) / z ** 4

    def phi_prime_at_zero(self, label: str) -> complex:
        zeta = self.zero(label)
        other = self.b if label == "a" else self.a
        return self.lam ** 2 * (zeta - other) / zeta ** 4

    def critical_points(self):
        return critical_points(self)

    def to_dict(self):
        return {"lambda": [self.lam.real, self.lam.imag], "a": [self.a.real, self.a.imag],
                "b": [self.b.real, self.b.imag]}


def qd_new(lam, a, b) -> QuadDiff:
    return QuadDiff(lam, a, b)


class CriticalPoint(NamedTuple):
    location: Union[complex, str]
    kind: str   # "simple_zero" | "pole"
    order: int


def critical_points(qd: QuadDiff):
    """Zeros a, b (order +1), the order-4 pole at 0 and the order-2 pole at infinity."""
    return (
        CriticalPoint(qd.a, "simple_zero", 1),
        CriticalPoint(qd.b, "simple_zero", 1),
        CriticalPoint(0j, "pole", 4),
        CriticalPoint(INFINITY, "pole", 2),
    )


def infinity_form(qd: QuadDiff, kind: str = "horizontal", tol: float = 1e-12) -> str:
    """Shape of trajectories near infinity: radial, circular or log_spiral."""
    lam = qd.lam if kind == "horizontal" else 1j * qd.lam
    if abs(lam.imag) <= tol * abs(lam):
        return "radial"
    if abs(lam.real) <= tol * abs(lam):
        return "circular"
    return "log_spiral"


def principal_roots(qd: QuadDiff):
    """(sqrt a, sqrt b, sqrt a * sqrt b) with principal factors."""
    ra, rb = cmath.sqrt(qd.a), cmath.sqrt(qd.b)
    return ra, rb, ra * rb


def gate_values(qd: QuadDiff):
    """``v+-`` = lambda (sqrt a +- sqrt b)^2 / sqrt(ab)."""
    ra, rb, rab = principal_roots(qd)
    return qd.lam * (ra + rb) ** 2 / rab, qd.lam * (ra - rb) ** 2 / rab


class GateResult(NamedTuple):
    exists: bool
    branch: str   # plus | minus | both | none
    v_plus: complex
    v_minus: complex

    def to_dict(self):
        return {"v_plus": [self.v_plus.real, self.v_plus.imag],
                "v_minus": [self.v_minus.real, self.v_minus.imag],
                "exists": self.exists, "branch": self.branch}


def short_trajectory_exists(qd: QuadDiff, tol: float = 1e-9) -> GateResult:
    """Analytic criterion: a short trajectory exists iff Re v+ = 0 or Re v- = 0."""
    vp, vm = gate_values(qd)
    bound = tol * max(1.0, abs(vp), abs(vm))
    plus, minus = abs(vp.real) < bound, abs(vm.real) < bound
    branch = {(True, True): "both", (True, False): "plus",
              (False, True): "minus", (False, False): "none"}[(plus, minus)]
    return GateResult(plus or minus, branch, vp, vm)


def period(qd: QuadDiff, sign: str) -> complex:
    """lambda * (i pi / 2) (sqrt a +- sqrt b)^2 / sqrt(ab), leading sign fixed to +.

    ``period(qd, "plus") - period(qd, "minus") == 2 pi i lambda``.  Which
    contour realises each value is given by :func:`period_homotopy`.
    """
    ra, rb, rab = principal_roots(qd)
    s = _sign(sign)
    return qd.lam * 0.5j * math.pi * (ra + s * rb) ** 2 / rab


def residue_form(qd: QuadDiff, sign: str) -> complex:
    """The same period written through the residues at 0 and infinity.

    -+ i pi (sqrt(ab)(a+b) - 2ab) / (2ab) with sqrt(ab) = -+ sqrt a sqrt b, i.e.
    the residue sum at 0 and infinity; equals ``period(qd, sign) / lambda``.
    """
    ra, rb, _ = principal_roots(qd)
    s = _sign(sign)
    rab = -s * ra * rb
    a, b = qd.a, qd.b
    return -s * 1j * math.pi * (rab * (a + b) - 2 * a * b) / (2 * a * b)


def _sign(sign: str) -> int:
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return 1 if sign == "plus" else -1


def sqrt_continued_along_segment(a: complex, b: complex, steps: int = 512) -> complex:
    """Continue the principal sqrt at ``a`` along the segment to ``b``."""
    w = cmath.sqrt(a)
    for t in np.linspace(0.0, 1.0, steps + 1)[1:]:
        z = a + (b - a) * t
        if abs(z) < 1e-300:
            raise ValueError("segment passes through the origin")
        w = nearest_root(z, w)
    return w


def period_homotopy(qd: QuadDiff, sign: str):
    """Contour that realises ``period(qd, sign)`` as half a closed integral.

    Returns ``(winding_class, orientation)``: class ``"segment"`` is a loop
    around a cut homotopic in C* to the segment [a, b]; class ``"around_origin"``
    differs from it by one turn around 0.  Orientation is that of the loop
    around the cut, with the square root normalised as ``~ z`` at infinity.
    """
    rb = cmath.sqrt(qd.b)
    same = abs(sqrt_continued_along_segment(qd.a, qd.b) - rb) < abs(rb)
    plus = sign == "plus"
    _sign(sign)
    if same:
        return ("around_origin", "counterclockwise") if plus else ("segment", "clockwise")
    return ("segment", "counterclockwise") if plus else ("around_origin", "clockwise")


def _log_stadium(qd: QuadDiff, winding_class: str, clockwise: bool, seg_len: Optional[float]):
    la = cmath.log(qd.a)
    dtheta = cmath.phase(qd.b / qd.a)
    if winding_class == "around_origin":
        dtheta -= 2.0 * math.pi * (1.0 if dtheta >= 0.0 else -1.0)
    elif winding_class != "segment":
        raise ValueError(f"unknown winding class {winding_class!r}")
    w0, w1 = la, la + complex(math.log(abs(qd.b) / abs(qd.a)), dtheta)
    d = w1 - w0
    ghosts = (w0 + 2j * math.pi, w0 - 2j * math.pi, w1 + 2j * math.pi, w1 - 2j * math.pi)

    def dist_to_cut(p):
        t = min(1.0, max(0.0, ((p - w0) * d.conjugate()).real / abs(d) ** 2))
        return abs(p - (w0 + t * d))

    eps = min(0.45 * min(dist_to_cut(g) for g in ghosts), 0.5, math.log(2.0))
    seg_len = seg_len or eps
    m = max(1, math.ceil(abs(d) / seg_len))
    u = d / abs(d)
    nrm = 1j * u
    ncap = 24
    pts = [w0 - eps * nrm + d * k / m for k in range(m)]
    pts += [w1 - eps * nrm * cmath.exp(1j * math.pi * k / ncap) for k in range(ncap)]
    pts += [w1 + eps * nrm - d * k / m for k in range(m)]
    pts += [w0 + eps * nrm * cmath.exp(1j * math.pi * k / ncap) for k in range(ncap)]
    pts = np.array(pts)
    if clockwise:
        pts = pts[::-1]
    # Start at the point of largest modulus: the outward radial ray from it
    # never meets the cut, so the branch ~ z at infinity is continued there.
    i0 = int(np.argmax(pts.real))
    pts = np.concatenate([pts[i0:], pts[:i0], pts[i0:i0 + 1]])
    return pts, eps


def _seed_from_infinity(radicand, w_start: complex, reach: float = 40.0, n: int = 4000) -> complex:
    ray = w_start.real + np.linspace(reach, 0.0, n) + 1j * w_start.imag
    vals = np.sqrt(radicand(ray))
    w = complex(np.exp(ray[0]))
    for r in vals:
        w = r if (r * w.conjugate()).real >= 0.0 else -r
    return complex(w)


def period_by_quadrature(qd: QuadDiff, sign: str, nodes_per_segment: int = 16,
                         seg_len: Optional[float] = None) -> complex:
    """Independent oracle for :func:`period`: half the closed contour integral.

    The contour is the image under exp of a thin stadium around a straight cut
    in the log plane, so it stays at least ``min(|a|, |b|) / 2`` away from 0.
    """
    winding_class, orientation = period_homotopy(qd, sign)
    pts, _ = _log_stadium(qd, winding_class, orientation == "clockwise", seg_len)
    a, b = qd.a, qd.b

    def radicand(w):
        e = np.exp(w)
        return (e - a) * (e - b)

    seed = _seed_from_infinity(radicand, complex(pts[0]))
    # sqrt((z-a)(z-b)) / z^2 dz with z = e^w
    integrand = TrackedSqrt(radicand, factor=lambda w: np.exp(-w), seed=seed)
    return qd.lam * 0.5 * integrate_path(integrand, Path(pts, closed=True), nodes_per_segment)


def launch_directions(qd: QuadDiff, zero, kind: str = "horizontal"):
    """The three angles theta in [0, 2 pi) with 3 theta + arg phi'(zero) = 0 mod 2 pi."""
    label = _zero_label(qd, zero)
    arg = cmath.phase(qd.phi_prime_at_zero(label))
    if kind == "vertical":
        arg += math.pi
    base = (-arg / 3.0) % (2.0 * math.pi / 3.0)
    return tuple(base + 2.0 * math.pi * k / 3.0 for k in range(3))


def _zero_label(qd: QuadDiff, zero) -> str:
    if isinstance(zero, str):
        if zero not in ("a", "b"):
            raise ValueError(f"unknown zero label {zero!r}")
        return zero
    z = complex(zero)
    tol = 1e-12 * qd.scale
    if abs(z - qd.a) <= tol:
        return "a"
    if abs(z - qd.b) <= tol:
        return "b"
    raise ValueError(f"{z!r} is not a zero of the quadratic differential")
