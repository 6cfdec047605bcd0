"""The algebraic equation z^2 C^2 - (p z + q) C + r = 0 for a Cauchy transform C.

Its discriminant D(z) = (p^2 - 4r) z^2 + 2pq z + q^2 defines the quadratic
differential -D(z)/z^4 dz^2, whose short trajectories are the candidate
supports of a measure with Cauchy transform C.  On such a support the
density with respect to dz is the jump (1/2 pi i) sqrt(D)/z^2.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .cxnum import as_complex, nearest_root
from .errors import DegenerateDiscriminant, DegenerateParameters, NotShortTrajectory, OriginEvaluation
from .quaddiff.core import QuadDiff

COEFF_EPS = 1e-12


@dataclass(frozen=True)
class AlgebraicEquation:
    p: complex
    q: complex
    r: complex

    def __post_init__(self):
        vals = [as_complex(v) for v in (self.p, self.q, self.r)]
        for name, v in zip("pqr", vals):
            object.__setattr__(self, name, v)
        bad = [f"{name}=0" for name, v in zip("pqr", vals) if abs(v) < COEFF_EPS]
        if bad:
            raise DegenerateParameters(bad)

    def D(self, z):
        c2, c1, c0 = self.discriminant_coeffs
        return (c2 * z + c1) * z + c0

    @property
    def discriminant_coeffs(self):
        p, q, r = self.p, self.q, self.r
        return p * p - 4 * r, 2 * p * q, q * q

    def to_dict(self):
        return {k: [v.real, v.imag] for k, v in (("p", self.p), ("q", self.q), ("r", self.r))}


class Discriminant(NamedTuple):
    c2: complex
    c1: complex
    c0: complex
    roots: tuple


class MassPair(NamedTuple):
    m_plus: complex
    m_minus: complex
    real_mass_exists: bool

    def to_dict(self):
        return {"m_plus": [self.m_plus.real, self.m_plus.imag],
                "m_minus": [self.m_minus.real, self.m_minus.imag],
                "real_mass_exists": self.real_mass_exists}


def discriminant(eq: AlgebraicEquation) -> Discriminant:
    """Coefficients of D and its roots -q / (p +- 2 sqrt r) (none if c2 = 0)."""
    c2, c1, c0 = eq.discriminant_coeffs
    roots = ()
    if abs(c2) > COEFF_EPS * max(1.0, abs(eq.p) ** 2, abs(eq.r)):
        sr = cmath.sqrt(eq.r)
        roots = (-eq.q / (eq.p + 2 * sr), -eq.q / (eq.p - 2 * sr))
    elif abs(c1) > 0:
        roots = (-c0 / c1,)
    return Discriminant(c2, c1, c0, roots)


def solve_pointwise(eq: AlgebraicEquation, z):
    """Both solutions (p z + q +- sqrt D(z)) / (2 z^2) at a point z != 0."""
    z = as_complex(z)
    if z == 0:
        raise OriginEvaluation("the equation degenerates at z = 0")
    s = cmath.sqrt(eq.D(z))
    b = eq.p * z + eq.q
    return (b + s) / (2 * z * z), (b - s) / (2 * z * z)


def pointwise_residual(eq: AlgebraicEquation, z, C) -> float:
    z = as_complex(z)
    terms = (z * z * C * C, (eq.p * z + eq.q) * C, eq.r)
    return abs(terms[0] - terms[1] + terms[2]) / max(abs(t) for t in terms)


def masses(eq: AlgebraicEquation, tol: float = 1e-9) -> MassPair:
    """Candidate total masses (p +- sqrt(p^2 - 4r)) / 2: the possible values of
    lim z C(z) at infinity.  A positive measure needs one of them real."""
    s = cmath.sqrt(eq.p * eq.p - 4 * eq.r)
    mp, mm = (eq.p + s) / 2, (eq.p - s) / 2
    real = abs(mp.imag) <= tol * max(1.0, abs(mp)) or abs(mm.imag) <= tol * max(1.0, abs(mm))
    return MassPair(mp, mm, real)


def to_quaddiff(eq: AlgebraicEquation) -> QuadDiff:
    """-D(z)/z^4 dz^2 written as lambda^2 (z-a)(z-b)/z^4 dz^2, lambda = i sqrt(p^2-4r)."""
    disc = discriminant(eq)
    if len(disc.roots) != 2:
        raise DegenerateDiscriminant(["p^2-4r=0"])
    a, b = disc.roots
    try:
        return QuadDiff(1j * cmath.sqrt(disc.c2), a, b)
    except DegenerateParameters as exc:
        raise DegenerateDiscriminant(exc.violations) from None


def _path_points(traj):
    return getattr(traj, "path", traj).points if not isinstance(traj, np.ndarray) else traj


def _end_labels(eq: AlgebraicEquation, pts, tol: float):
    roots = discriminant(eq).roots
    if len(roots) != 2:
        raise DegenerateDiscriminant(["p^2-4r=0"])
    labels = []
    for end in (pts[0], pts[-1]):
        d = [abs(end - z) for z in roots]
        k = int(np.argmin(d))
        if d[k] > tol:
            raise NotShortTrajectory(f"endpoint {end!r} is not a root of D")
        labels.append(k)
    return labels


@dataclass(frozen=True)
class Density:
    weights: np.ndarray        # per polyline segment, >= 0 after the orientation fix
    total_mass: float
    orientation: int           # +1 or -1
    imag_fraction: float       # |sum Im| / sum |w|: 0 on an exact trajectory
    negative_weights: int


def density_along(eq: AlgebraicEquation, traj, subdivisions: int = 4) -> Density:
    """Mass of the density (1/2 pi i) sqrt(D)/z^2 dz along a short trajectory.

    The root is continued along the curve, so the weights keep one sign on
    a genuine trajectory; the global sign (the side of the jump) is fixed by
    making the first nonzero weight positive.  Weights use the midpoint
    rule on each segment, optionally split into ``subdivisions`` pieces.
    """
    pts = np.asarray(_path_points(traj), dtype=complex)
    scale = max(1.0, *(abs(z) for z in discriminant(eq).roots))
    _end_labels(eq, pts, 1e-6 * scale)
    m = max(1, int(subdivisions))
    if m > 1:
        t = np.arange(m) / m
        pts = np.append((pts[:-1, None] + (pts[1:] - pts[:-1])[:, None] * t[None, :]).ravel(), pts[-1])
    mid = 0.5 * (pts[1:] + pts[:-1])
    dz = np.diff(pts)
    raw = np.sqrt(eq.D(mid))
    tracked = np.empty_like(raw)
    prev = raw[0]
    for k, v in enumerate(raw):
        prev = nearest_root(complex(v * v), prev) if k else v
        tracked[k] = prev
    vals = tracked / (mid * mid) * dz / (2j * math.pi)
    nz = np.flatnonzero(np.abs(vals.real) > 0)
    sign = 1 if nz.size == 0 or vals.real[nz[0]] > 0 else -1
    w = sign * vals.real
    total = float(math.fsum(w))
    imag_fraction = abs(float(np.sum(vals.imag))) / max(float(np.sum(np.abs(vals))), 1e-300)
    return Density(w, total, sign, imag_fraction, int(np.sum(w < 0)))


def _ray_is_free(theta: float, pts: np.ndarray) -> bool:
    # Does the ray {t e^{i theta}, t > 0} miss the polyline?
    rot = pts * cmath.exp(-1j * theta)
    x, y = rot.real, rot.imag
    for k in range(len(pts) - 1):
        y0, y1 = y[k], y[k + 1]
        if (y0 > 0) == (y1 > 0) and y0 != 0 and y1 != 0:
            continue
        if y0 == y1:
            if max(x[k], x[k + 1]) > 0:
                return False
            continue
        xc = x[k] + (x[k + 1] - x[k]) * (-y0) / (y1 - y0)
        if xc > 0:
            return False
    return True


def branch_at_origin(eq: AlgebraicEquation, traj, lead: Optional[complex] = None,
                     reach: float = 1e3, n: int = 20000) -> Optional[complex]:
    """Value at 0 of the root of D that behaves like ``lead * z`` at infinity.

    The root is continued inward along a ray from 0 that does not meet the
    trajectory (returns None when every ray does).  ``lead`` defaults to the
    principal sqrt(p^2 - 4r).
    """
    pts = np.asarray(_path_points(traj), dtype=complex)
    c2 = discriminant(eq).c2
    lead = cmath.sqrt(c2) if lead is None else complex(lead)
    if abs(lead * lead - c2) > 1e-9 * abs(c2):
        raise ValueError("lead must be a square root of p^2 - 4r")
    thetas = np.linspace(-math.pi, math.pi, 721)[:-1]
    free = np.array([_ray_is_free(t, pts) for t in thetas])
    if not free.any():
        return None
    # centre of the longest run of free directions (cyclically)
    best, best_len = None, -1
    doubled = np.concatenate([free, free])
    k = 0
    while k < len(free):
        if doubled[k]:
            j = k
            while j < k + len(free) and doubled[j]:
                j += 1
            if j - k > best_len:
                best, best_len = (k + j - 1) / 2.0, j - k
            k = j
        else:
            k += 1
    theta = thetas[0] + best * (thetas[1] - thetas[0])
    scale = max(1.0, float(np.max(np.abs(pts))))
    e = cmath.exp(1j * theta)
    radii = np.geomspace(reach * scale, 1e-9 * scale, n)
    w = lead * radii[0] * e
    for rad in radii:
        w = nearest_root(complex(eq.D(rad * e)), w)
    return complex(nearest_root(complex(eq.D(0.0)), w))
