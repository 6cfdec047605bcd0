"""Generalized Bessel polynomials B_n^(alpha) and their zeros.

    B_n(z) = sum_k C(n, k) (n + k + alpha - 2)_(k) z^k      (falling factorial)

In the varying regime alpha = A n the zeros shrink like 1/n; after the
rescaling z -> z / n they accumulate on a short trajectory of the
quadratic differential -D_A(z)/z^4 dz^2 with
D_A(z) = (A+2)^2 z^2 + 2 A z + 1, and the Cauchy transform C of the limit
satisfies z^2 C^2 + (A z + 1) C - A - 1 = 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import gmpy2
import numpy as np
from gmpy2 import mpc

from .aberth import roots_adaptive
from .cxnum import as_complex
from .errors import (DegenerateParameters, EvaluationOverflow, NoConvergence, NoShortTrajectory,
                     OriginEvaluation, SupportCollision)
from .motherbody import AlgebraicEquation, to_quaddiff
from .quaddiff.core import QuadDiff

PARAM_EPS = 1e-9
CERTIFY_TOL = 1e-8


@dataclass(frozen=True)
class FamilyParameter:
    A: complex

    def __post_init__(self):
        A = as_complex(self.A)
        object.__setattr__(self, "A", A)
        bad = [f"A={v}" for v in (-1, -2) if abs(A - v) < PARAM_EPS]
        if bad:
            raise DegenerateParameters(bad)

    def alpha(self, n: int) -> complex:
        return self.A * n

    def equation(self) -> AlgebraicEquation:
        A = self.A
        return AlgebraicEquation(-A, -1.0, -(A + 1))


@dataclass(frozen=True)
class BesselPolynomial:
    n: int
    alpha: complex
    coeffs: np.ndarray     # ascending powers

    @property
    def leading(self) -> complex:
        return complex(self.coeffs[-1])

    def mp_coeffs(self, prec: int):
        return _mp_coeffs(self.n, self.alpha, prec)


def _mp_coeffs(n: int, alpha: complex, prec: int):
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        a = mpc(alpha)
        c = [mpc(1)]
        for k in range(1, n + 1):
            c.append(c[-1] * (n - k + 1) / k * (n + k + a - 2))
        return c


def bessel_coeffs(n: int, alpha) -> BesselPolynomial:
    """Coefficients by the product recurrence c_k = c_{k-1} (n-k+1)/k (n+k+alpha-2)."""
    if n < 0:
        raise ValueError("degree must be >= 0")
    alpha = as_complex(alpha)
    c = np.empty(n + 1, dtype=complex)
    c[0] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, n + 1):
            c[k] = c[k - 1] * (n - k + 1) / k * (n + k + alpha - 2)
    if not np.all(np.isfinite(c)):
        raise EvaluationOverflow(f"coefficients of degree {n} overflow double precision")
    return BesselPolynomial(n, alpha, c)


class Evaluation(NamedTuple):
    value: complex
    derivative: complex
    second: complex
    scale: float        # max |coefficient| used to pre-scale the Horner pass


def bessel_eval(poly: BesselPolynomial, z) -> Evaluation:
    """B, B' and B'' at z by one Horner pass on max-normalised coefficients."""
    z = as_complex(z)
    scale = float(np.max(np.abs(poly.coeffs)))
    c = poly.coeffs / scale
    p, d1, d2 = c[-1], 0j, 0j
    for ck in c[-2::-1]:
        d2 = d2 * z + d1
        d1 = d1 * z + p
        p = p * z + ck
    out = (p * scale, d1 * scale, 2 * d2 * scale)
    if not all(cmath.isfinite(v) for v in out):
        raise EvaluationOverflow(f"evaluation of degree {poly.n} overflows at z={z!r}")
    return Evaluation(*out, scale)


def _abs_eval(poly: BesselPolynomial, r: float):
    # same Horner pass on |c_k| at |z|: bounds for the size of each term
    c = np.abs(poly.coeffs)
    p, d1, d2 = c[-1], 0.0, 0.0
    for ck in c[-2::-1]:
        d2 = d2 * r + d1
        d1 = d1 * r + p
        p = p * r + ck
    return p, d1, 2 * d2


def ode_residual(poly: BesselPolynomial, z) -> float:
    """Scaled residual of z^2 B'' + (alpha z + 1) B' - n (n + alpha - 1) B."""
    z = as_complex(z)
    n, al = poly.n, poly.alpha
    v, d1, d2, _ = bessel_eval(poly, z)
    k = n * (n + al - 1)
    res = z * z * d2 + (al * z + 1) * d1 - k * v
    b0, b1, b2 = _abs_eval(poly, abs(z))
    size = abs(z) ** 2 * b2 + abs(al * z + 1) * b1 + abs(k) * b0
    return abs(res) / size if size else abs(res)


def recurrence_residual(n: int, alpha, z) -> float:
    """Scaled residual of the three-term recurrence

        (n+alpha-1)(2n+alpha-2) B_{n+1}
            = ((2n+alpha)(2n+alpha-2) z + alpha - 2)(2n+alpha-1) B_n + n (2n+alpha) B_{n-1}

    with each polynomial built from its own coefficient formula.
    """
    if n < 1:
        raise ValueError("the recurrence needs n >= 1")
    z, al = as_complex(z), as_complex(alpha)
    polys = [bessel_coeffs(m, al) for m in (n - 1, n, n + 1)]
    vals = [bessel_eval(p, z).value for p in polys]
    sizes = [_abs_eval(p, abs(z))[0] for p in polys]
    f_left = (n + al - 1) * (2 * n + al - 2)
    f_mid = ((2 * n + al) * (2 * n + al - 2) * z + al - 2) * (2 * n + al - 1)
    f_low = n * (2 * n + al)
    res = f_left * vals[2] - f_mid * vals[1] - f_low * vals[0]
    size = abs(f_left) * sizes[2] + abs(f_mid) * sizes[1] + abs(f_low) * sizes[0]
    return abs(res) / size


def leading_coefficient(n: int, alpha) -> complex:
    """(2n + alpha - 2)_(n), the falling factorial."""
    x = as_complex(alpha) + 2 * n - 2
    out = 1 + 0j
    for j in range(n):
        out *= x - j
    return out


def gen_binomial(top: complex, k: int) -> complex:
    """C(top, k) for complex top, as a finite product."""
    out = 1 + 0j
    for j in range(k):
        out *= (top - j) / (j + 1)
    return out


def laguerre(n: int, beta, x) -> complex:
    """L_n^(beta)(x) = sum_k C(n + beta, n - k) (-x)^k / k!."""
    beta, x = as_complex(beta), as_complex(x)
    return sum(gen_binomial(n + beta, n - k) * (-x) ** k / math.factorial(k) for k in range(n + 1))


def laguerre_link_residual(n: int, alpha, z) -> float:
    """Scaled residual of B_n^(alpha)(z) = n! (-z)^n L_n^(-2n-alpha+1)(1/z).

    This is the normalisation consistent with the coefficient formula above
    (it reduces to 1 + alpha z at n = 1).
    """
    z, al = as_complex(z), as_complex(alpha)
    if z == 0:
        raise OriginEvaluation("the Laguerre link is singular at z = 0")
    beta = -2 * n - al + 1
    terms = [math.factorial(n) / math.factorial(k) * gen_binomial(n + beta, n - k)
             * (-1) ** (n + k) * z ** (n - k) for k in range(n + 1)]
    rhs = sum(terms)
    poly = bessel_coeffs(n, al)
    lhs = bessel_eval(poly, z).value
    size = _abs_eval(poly, abs(z))[0] + sum(abs(t) for t in terms)
    return abs(lhs - rhs) / size


@dataclass(frozen=True)
class EmpiricalMeasure:
    points: np.ndarray
    n: int
    precision_bits: int = 53
    max_certificate: float = 0.0

    @property
    def weight(self) -> float:
        return 1.0 / self.n

    def scaled(self, factor) -> "EmpiricalMeasure":
        return EmpiricalMeasure(self.points * factor, self.n, self.precision_bits, self.max_certificate)

    def cauchy_transform(self, z) -> complex:
        return cauchy_transform(self, z)


@lru_cache(maxsize=64)
def _zeros_cached(n: int, alpha: complex):
    return roots_adaptive(lambda prec: _mp_coeffs(n, alpha, prec), n)


def _certificate(poly: BesselPolynomial, z: complex, prec: int) -> float:
    # |B(z)| / sum |c_k| |z|^k, evaluated in multiprecision
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        c = poly.mp_coeffs(prec)
        zz = mpc(z)
        r = abs(zz)
        p = c[-1]
        s = abs(c[-1])
        for ck in reversed(c[:-1]):
            p = p * zz + ck
            s = s * r + abs(ck)
        return float(abs(p) / s)


def bessel_zeros(poly: BesselPolynomial) -> EmpiricalMeasure:
    """All zeros of ``poly`` (Aberth-Ehrlich in adaptive multiprecision).

    Each zero, rounded to double, is certified by
    |B(z_k)| <= 1e-8 * sum |c_k| |z_k|^k.
    """
    if poly.n < 1:
        raise ValueError("need degree >= 1")
    if abs(poly.leading) == 0:
        raise NoConvergence("leading coefficient vanishes", worst_residual=None)
    z, prec = _zeros_cached(poly.n, complex(poly.alpha))
    worst = max(_certificate(poly, zk, prec) for zk in z)
    if worst > CERTIFY_TOL:
        raise NoConvergence("zero certification failed", worst_residual=worst)
    order = np.lexsort((z.imag, z.real))
    return EmpiricalMeasure(z[order].copy(), poly.n, prec, worst)


def cauchy_transform(measure: EmpiricalMeasure, z) -> complex:
    """(1/n) sum 1 / (z - z_k)."""
    z = as_complex(z)
    d = z - measure.points
    if np.min(np.abs(d)) < 1e-9:
        raise SupportCollision(f"{z!r} is within 1e-9 of a zero")
    return complex(np.sum(1.0 / d) / measure.n)


def log_derivative(poly: BesselPolynomial, z, prec: int = 256) -> complex:
    """B'(z) / (n B(z)), evaluated in multiprecision."""
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        c = poly.mp_coeffs(prec)
        zz = mpc(as_complex(z))
        p, dp = c[-1], mpc(0)
        for ck in reversed(c[:-1]):
            dp = dp * zz + p
            p = p * zz + ck
        return complex(dp / (poly.n * p))


def family_zeros(A: FamilyParameter, n: int) -> EmpiricalMeasure:
    """Zeros of B_n^(A n) multiplied by n (the scale of the limit curve)."""
    poly = bessel_coeffs(n, A.alpha(n))
    return bessel_zeros(poly).scaled(n)


def algebraic_residual(A: FamilyParameter, n: int, z) -> float:
    """|z^2 C^2 + (A z + 1) C - A - 1| with C the Cauchy transform of the scaled zeros."""
    z = as_complex(z)
    C = cauchy_transform(family_zeros(A, n), z)
    return abs(z * z * C * C + (A.A * z + 1) * C - A.A - 1)


def family_roots(A: FamilyParameter):
    """zeta_-+ = ((1 -+ i sqrt(A+1)) / (A+2))^2, the zeros of D_A."""
    s = cmath.sqrt(A.A + 1)
    return ((1 - 1j * s) / (A.A + 2)) ** 2, ((1 + 1j * s) / (A.A + 2)) ** 2


def family_quaddiff(A: FamilyParameter) -> QuadDiff:
    """-D_A(z)/z^4 dz^2 as QuadDiff(i(A+2), zeta_-, zeta_+)."""
    qd = to_quaddiff(A.equation())
    zm, zp = family_roots(A)
    tol = 1e-10 * max(1.0, abs(zm), abs(zp))
    ok = {abs(qd.a - zm) < tol and abs(qd.b - zp) < tol, abs(qd.a - zp) < tol and abs(qd.b - zm) < tol}
    if True not in ok or abs(qd.lam ** 2 + (A.A + 2) ** 2) > 1e-10 * abs(A.A + 2) ** 2:
        raise AssertionError("discriminant roots disagree with the closed form")
    return QuadDiff(1j * (A.A + 2), zm, zp)


def point_to_polyline(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to a polyline."""
    p0, p1 = poly[:-1], poly[1:]
    seg = p1 - p0
    L2 = np.abs(seg) ** 2
    L2[L2 == 0] = 1.0
    out = np.empty(points.size)
    for i, z in enumerate(points):
        t = np.clip(((z - p0) * seg.conjugate()).real / L2, 0.0, 1.0)
        out[i] = float(np.min(np.abs(z - (p0 + t * seg))))
    return out


class Overlay(NamedTuple):
    max_dist: float
    mean_dist: float
    diameter: float
    zeros: np.ndarray          # scaled zeros
    curves: tuple              # polylines of the short trajectories


def overlay_distance(A: FamilyParameter, n: int, graph=None) -> Overlay:
    """Distance of the scaled zeros of B_n^(A n) to the short trajectories of
    the family differential, normalised by the diameter of their union."""
    from .quaddiff.graph import critical_graph

    if n < 1:
        raise ValueError("n must be positive")
    graph = graph or critical_graph(family_quaddiff(A))
    curves = tuple(st.path.points for st in graph.short_trajectories)
    if not curves:
        raise NoShortTrajectory(f"no short trajectory for A={A.A!r}")
    union = np.concatenate(curves)
    diameter = float(np.max(np.abs(union[:, None] - union[None, :]))) if union.size < 4000 else \
        float(np.ptp(union.real) ** 2 + np.ptp(union.imag) ** 2) ** 0.5
    zeros = family_zeros(A, n).points
    d = np.min(np.stack([point_to_polyline(zeros, c) for c in curves]), axis=0) / diameter
    return Overlay(float(d.max()), float(d.mean()), diameter, zeros, curves)
