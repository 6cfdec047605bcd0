"""Complex-arithmetic foundation.

Branch-tracked square roots, Gauss-Legendre quadrature along polylines and an
embedded Dormand-Prince stepper for unit-speed direction fields.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import NonFiniteSample, StepUnderflow, TrackerUninitialized

# Nearest-value continuation is refused (and the caller subdivides) when the
# new root is not clearly closer to the old value than its negative.
CONTINUITY_RATIO = 0.5


def as_complex(value) -> complex:
    """Coerce ``value`` (complex, real, or an ``(re, im)`` pair) to a finite complex."""
    if isinstance(value, (tuple, list, np.ndarray)) and len(value) == 2:
        value = complex(float(value[0]), float(value[1]))
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise NonFiniteSample(f"non-finite complex value {z!r}")
    return z


@dataclass(frozen=True)
class Path:
    """Oriented polyline in the complex plane."""

    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex).ravel()
        object.__setattr__(self, "points", pts)
        if pts.size < 2:
            raise ValueError("a path needs at least two points")
        if not np.all(np.isfinite(pts)):
            raise NonFiniteSample("path contains non-finite points")
        if np.any(np.diff(pts) == 0):
            raise ValueError("consecutive path points must be distinct")
        if self.closed and abs(pts[0] - pts[-1]) > 1e-12:
            raise ValueError("closed path must end where it starts")

    @classmethod
    def segment(cls, z0, z1):
        return cls(np.array([as_complex(z0), as_complex(z1)]))

    @classmethod
    def circle(cls, center, radius, n=64, clockwise=False):
        """Closed regular polygon inscribed in a circle (exact for contour integrals
        of functions analytic in the annulus it sweeps)."""
        t = np.linspace(0.0, 2.0 * np.pi, n + 1)
        if clockwise:
            t = -t
        pts = as_complex(center) + radius * np.exp(1j * t)
        pts[-1] = pts[0]
        return cls(pts, closed=True)

    @property
    def length(self) -> float:
        return float(np.abs(np.diff(self.points)).sum())


@dataclass
class BranchTracker:
    """Last committed value of a continuously tracked square root."""

    current_value: Optional[complex] = None

    def seed(self, value) -> "BranchTracker":
        self.current_value = complex(value)
        return self


def nearest_root(f_value: complex, reference: complex) -> complex:
    r = cmath.sqrt(f_value)
    # |r - ref| < |r + ref|  <=>  Re(r * conj(ref)) > 0
    if (r * reference.conjugate()).real < 0.0:
        return -r
    return r


def sqrt_continuous(f_value, tracker: BranchTracker) -> complex:
    """Square root of ``f_value`` closest to the tracker's last value; updates the tracker."""
    if tracker.current_value is None:
        raise TrackerUninitialized("branch tracker has no seed value")
    w = nearest_root(complex(f_value), tracker.current_value)
    tracker.current_value = w
    return w


def is_continuous(w_new: complex, w_old: complex, ratio: float = CONTINUITY_RATIO) -> bool:
    return abs(w_new - w_old) < ratio * abs(w_new + w_old)


@dataclass
class TrackedSqrt:
    """Integrand ``factor(z) * sqrt(radicand(z))`` with the root continued along the path.

    ``seed`` is (approximately) the value of the square root at the first point
    of the path; the exact root there is the one closest to it.  Both callables
    must accept numpy arrays.
    """

    radicand: Callable
    factor: Optional[Callable] = None
    seed: complex = 1.0
    end_value: Optional[complex] = field(default=None, init=False)

    def __call__(self, z):
        raise TypeError("TrackedSqrt is evaluated by integrate_path, not directly")


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights on [-1, 1], ascending nodes."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _evaluate(f, z):
    try:
        vals = np.asarray(f(z), dtype=complex)
        if vals.shape != z.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([complex(f(complex(p))) for p in z])
    return vals


def _tracked_segment(integrand: TrackedSqrt, z0, z1, w_start, x, wts, depth=0):
    # Returns (integral over [z0, z1], root value at z1).
    t = 0.5 * (x + 1.0)
    pts = np.append(z0 + (z1 - z0) * t, z1)
    raw = np.sqrt(np.asarray(integrand.radicand(pts), dtype=complex))
    if not np.all(np.isfinite(raw)):
        raise NonFiniteSample(f"non-finite radicand on segment {z0!r} -> {z1!r}")
    tracked = np.empty_like(raw)
    prev = w_start
    ok = True
    for k, r in enumerate(raw):
        w = r if (r * prev.conjugate()).real >= 0.0 else -r
        if not is_continuous(w, prev):
            ok = False
            break
        tracked[k] = w
        prev = w
    if not ok:
        if depth > 40:
            raise NonFiniteSample(f"cannot keep the branch continuous near {z0!r}")
        mid = 0.5 * (z0 + z1)
        i1, w_mid = _tracked_segment(integrand, z0, mid, w_start, x, wts, depth + 1)
        i2, w_end = _tracked_segment(integrand, mid, z1, w_mid, x, wts, depth + 1)
        return i1 + i2, w_end
    vals = tracked[:-1]
    if integrand.factor is not None:
        vals = vals * np.asarray(integrand.factor(pts[:-1]), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample(f"non-finite integrand on segment {z0!r} -> {z1!r}")
    return 0.5 * (z1 - z0) * np.dot(wts, vals), tracked[-1]


def integrate_path(f, path: Path, nodes_per_segment: int = 16) -> complex:
    """Gauss-Legendre approximation of the contour integral of ``f`` along ``path``.

    ``f`` is either a vectorised callable or a :class:`TrackedSqrt`, in which
    case the square root is continued from segment to segment (segments are
    halved automatically when a node-to-node jump threatens continuity).  For a
    tracked integrand the root value at the end of the path is stored in
    ``f.end_value``.
    """
    if nodes_per_segment < 2:
        raise ValueError("nodes_per_segment must be >= 2")
    if not isinstance(path, Path):
        path = Path(np.asarray(path, dtype=complex))
    x, wts = gauss_legendre(nodes_per_segment)
    pts = path.points
    if isinstance(f, TrackedSqrt):
        w = nearest_root(complex(f.radicand(np.array([pts[0]]))[0]), complex(f.seed))
        total = 0j
        for z0, z1 in zip(pts[:-1], pts[1:]):
            part, w = _tracked_segment(f, complex(z0), complex(z1), w, x, wts)
            total += part
        f.end_value = w
        return complex(total)
    return complex(np.sum(_segment_integrals(f, pts, x, wts)))


def _segment_integrals(f, pts, x, wts):
    z0 = pts[:-1, None]
    half = 0.5 * (pts[1:] - pts[:-1])[:, None]
    nodes = z0 + half * (x[None, :] + 1.0)
    vals = _evaluate(f, nodes.ravel()).reshape(nodes.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFiniteSample("integrand returned NaN/Inf at a quadrature node")
    return half[:, 0] * (vals @ wts)


def integrate_path_cumulative(f, path: Path, nodes_per_segment: int = 16) -> np.ndarray:
    """Running integral at every vertex of ``path`` (first entry 0)."""
    if not isinstance(path, Path):
        path = Path(np.asarray(path, dtype=complex))
    x, wts = gauss_legendre(nodes_per_segment)
    pts = path.points
    if isinstance(f, TrackedSqrt):
        parts = np.empty(pts.size - 1, dtype=complex)
        w = nearest_root(complex(f.radicand(np.array([pts[0]]))[0]), complex(f.seed))
        for k in range(pts.size - 1):
            parts[k], w = _tracked_segment(f, complex(pts[k]), complex(pts[k + 1]), w, x, wts)
        f.end_value = w
    else:
        parts = _segment_integrals(f, pts, x, wts)
    out = np.zeros(pts.size, dtype=complex)
    out[1:] = np.cumsum(parts)
    return out


# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

H_MIN = 1e-14


def _weighted_sum(weights, ks) -> complex:
    re = math.fsum(w * k.real for w, k in zip(weights, ks))
    im = math.fsum(w * k.imag for w, k in zip(weights, ks))
    return complex(re, im)


def ode_step_adaptive(field: Callable[[complex], complex], z, h: float, tol: float,
                      h_min: float = H_MIN):
    """One accepted Dormand-Prince step of ``dz/ds = field(z)``.

    The step is retried with a smaller ``h`` until the embedded error estimate
    is at most ``tol * max(1, |z|)``.  Returns ``(z_next, h_next)``; the step
    actually taken is ``|z_next - z|`` for a unit-modulus field.

    Raises
    ------
    StepUnderflow
        if ``h`` drops below ``h_min`` (the caller is approaching a singularity).
    """
    if h <= 0 or tol <= 0:
        raise ValueError("h and tol must be positive")
    z = complex(z)
    scale = tol * max(1.0, abs(z))
    while True:
        if h < h_min:
            raise StepUnderflow(z, h)
        ks = []
        try:
            for i in range(7):
                zi = z + h * _weighted_sum(_A[i], ks) if i else z
                ks.append(complex(field(zi)))
        except (ZeroDivisionError, OverflowError, ValueError):
            h *= 0.2
            continue
        if not all(math.isfinite(k.real) and math.isfinite(k.imag) for k in ks):
            h *= 0.2
            continue
        err = abs(h * _weighted_sum(_E, ks))
        if err <= scale:
            factor = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * (scale / err) ** 0.2))
            return z + h * _weighted_sum(_B5, ks), h * factor
        h *= min(1.0, max(0.2, 0.9 * (scale / err) ** 0.2))
