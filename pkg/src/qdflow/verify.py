"""Randomised invariant suites shared by the command line and the tests."""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .bessel import (bessel_coeffs, bessel_zeros, laguerre_link_residual, ode_residual,
                     recurrence_residual)
from .quaddiff.core import QuadDiff, gate_values, period, period_by_quadrature, principal_roots, residue_form
from .quaddiff.graph import critical_graph
from .quaddiff.trace import trace


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


@dataclass
class SuiteResult:
    suite: str
    checks: List[Check] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, value, threshold, passed=None, detail=""):
        ok = value <= threshold if passed is None else passed
        self.checks.append(Check(name, float(value), float(threshold), bool(ok), detail))

    def table(self) -> str:
        rows = [f"{'suite':8s} {'check':34s} {'value':>12s} {'limit':>10s}  result"]
        for c in self.checks:
            rows.append(f"{self.suite:8s} {c.name:34s} {c.value:12.3e} {c.threshold:10.1e}  "
                        f"{'PASS' if c.passed else 'FAIL'}{'  ' + c.detail if c.detail else ''}")
        return "\n".join(rows)


def random_point(rng, lo=0.2, hi=5.0) -> complex:
    return rng.uniform(lo, hi) * cmath.exp(1j * rng.uniform(-math.pi, math.pi))


def random_pair(rng, min_sep=0.1):
    while True:
        a, b = random_point(rng), random_point(rng)
        if abs(a - b) > min_sep * max(abs(a), abs(b)):
            return a, b


def period_suite(samples=100, seed=7) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("periods")
    t0 = time.perf_counter()
    worst_q = worst_d = worst_r = 0.0
    for _ in range(samples):
        a, b = random_pair(rng)
        lam = random_point(rng, 0.5, 2.0)
        qd = QuadDiff(lam, a, b)
        for sign in ("plus", "minus"):
            exact = period(qd, sign)
            quad = period_by_quadrature(qd, sign)
            worst_q = max(worst_q, abs(exact - quad) / abs(exact))
            worst_r = max(worst_r, abs(residue_form(qd, sign) * lam - exact) / abs(exact))
        diff = period(qd, "plus") - period(qd, "minus")
        worst_d = max(worst_d, abs(diff - 2j * math.pi * lam) / abs(2 * math.pi * lam))
    res.add("closed form vs quadrature (rel)", worst_q, 1e-8)
    res.add("plus - minus = 2 pi i lambda (rel)", worst_d, 1e-10)
    res.add("residue form (rel)", worst_r, 1e-12)
    res.seconds = time.perf_counter() - t0
    return res


@dataclass(frozen=True)
class GateSample:
    qd: QuadDiff
    constructed: bool        # lambda chosen so that a gate value is imaginary


def gate_samples(count=200, seed=11):
    """Half constructed to fire, half with both |Re v| > 0.05 |v|."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        a, b = random_pair(rng)
        ra, rb, rab = principal_roots(QuadDiff(1.0, a, b))
        mod = rng.uniform(0.5, 2.0)
        if k % 2 == 0:
            c = (ra + rb) ** 2 / rab if rng.random() < 0.5 else (ra - rb) ** 2 / rab
            beta = math.pi / 2 - cmath.phase(c) + math.pi * int(rng.integers(2))
            out.append(GateSample(QuadDiff(mod * cmath.exp(1j * beta), a, b), True))
        else:
            while True:
                lam = mod * cmath.exp(1j * rng.uniform(-math.pi, math.pi))
                vp, vm = gate_values(QuadDiff(lam, a, b))
                if abs(vp.real) > 0.05 * abs(vp) and abs(vm.real) > 0.05 * abs(vm):
                    break
            out.append(GateSample(QuadDiff(lam, a, b), False))
    return out


def threshold_distance(qd: QuadDiff) -> float:
    vp, vm = gate_values(qd)
    return min(abs(vp.real) / abs(vp), abs(vm.real) / abs(vm))


def gate_suite(samples=200, seed=11, required=None) -> SuiteResult:
    res = SuiteResult("gates")
    t0 = time.perf_counter()
    agree = 0
    far_disagreements = 0
    for s in gate_samples(samples, seed):
        g = critical_graph(s.qd)
        geometric = len(g.short_trajectories) > 0
        if geometric == g.gate.exists:
            agree += 1
        elif threshold_distance(s.qd) > 1e-3:
            far_disagreements += 1
    need = required if required is not None else samples - samples // 100
    res.add("agreement (count)", agree, need, passed=agree >= need, detail=f"{agree}/{samples}")
    res.add("disagreements off threshold", far_disagreements, 0)
    res.seconds = time.perf_counter() - t0
    return res


def _side_of_passage(qd: QuadDiff, theta: float, target: str = "b") -> float:
    """+-1 for the side on which the trajectory from a passes ``target``, 0 on a hit."""
    t = trace(qd, qd.a, theta)
    if t.endpoint.kind == "hits_zero" and t.endpoint.zero == target:
        return 0.0
    zb = qd.zero(target)
    pts = t.points
    k = int(np.argmin(np.abs(pts[1:-1] - zb))) + 1
    tangent = pts[k + 1] - pts[k - 1]
    return float(np.sign((tangent.conjugate() * (zb - pts[k])).imag))


@dataclass(frozen=True)
class ThresholdResult:
    beta_star: float
    beta_root: float
    relative_re: float     # |Re v(beta*)| / |v|
    iterations: int


def threshold_phase(a, b, sign="plus", modulus=1.0, bracket=0.05, xtol=1e-7) -> Optional[ThresholdResult]:
    """Locate by bisection the phase of lambda at which the trajectory from a
    sweeps across b, following one launch ray continuously in beta.

    Returns None if no a-b short trajectory exists at the analytic root
    (e.g. the finite trajectory is a loop).
    """
    ra, rb, rab = principal_roots(QuadDiff(1.0, a, b))
    c = (ra + rb) ** 2 / rab if sign == "plus" else (ra - rb) ** 2 / rab
    beta_root = math.pi / 2 - cmath.phase(c)
    qd0 = QuadDiff(modulus * cmath.exp(1j * beta_root), a, b)
    g = critical_graph(qd0)
    hits = [t for t in g.trajectories if t.launch.zero == "a" and t.endpoint.kind == "hits_zero"
            and t.endpoint.zero == "b"]
    if not hits:
        return None
    theta_root = hits[0].launch.angle

    def side(beta):
        qd = QuadDiff(modulus * cmath.exp(1j * beta), a, b)
        return _side_of_passage(qd, theta_root - 2.0 * (beta - beta_root) / 3.0)

    # asymmetric so that no midpoint lands on the analytic root by construction
    lo, hi = beta_root - bracket, beta_root + 0.618 * bracket
    s_lo, s_hi = side(lo), side(hi)
    if s_lo == 0 or s_hi == 0 or s_lo == s_hi:
        return None
    it = 0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        s_mid = side(mid)
        it += 1
        if s_mid == 0:
            lo = hi = mid
            break
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    beta = 0.5 * (lo + hi)
    v = modulus * cmath.exp(1j * beta) * c
    return ThresholdResult(beta, beta_root, abs(v.real) / abs(v), it)


def bessel_suite(samples=50, seed=5) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("bessel")
    t0 = time.perf_counter()

    def sample():
        n = int(rng.integers(1, 26))
        alpha = complex(rng.normal(0, 3), rng.normal(0, 3))
        z = complex(rng.normal(0, 1), rng.normal(0, 1))
        return n, alpha, z

    worst = {"recurrence": 0.0, "ode": 0.0, "laguerre": 0.0}
    for _ in range(samples):
        n, al, z = sample()
        worst["recurrence"] = max(worst["recurrence"], recurrence_residual(n, al, z))
        n, al, z = sample()
        worst["ode"] = max(worst["ode"], ode_residual(bessel_coeffs(n, al), z))
        n, al, z = sample()
        worst["laguerre"] = max(worst["laguerre"], laguerre_link_residual(n, al, z))
    for k, v in worst.items():
        res.add(f"{k} residual (n <= 25)", v, 1e-10)
    for n in (10, 40, 80):
        vs, vp = vieta_errors(n, 3.0 * n)
        res.add(f"Vieta sum, n={n}, alpha=3n", vs, 1e-8)
        res.add(f"Vieta product, n={n}, alpha=3n", vp, 1e-8)
    res.seconds = time.perf_counter() - t0
    return res


def vieta_errors(n: int, alpha):
    """Relative errors of sum and product of the computed zeros."""
    poly = bessel_coeffs(n, alpha)
    z = bessel_zeros(poly).points
    c = poly.coeffs
    s_exact = -c[n - 1] / c[n]
    p_exact = (-1) ** n * c[0] / c[n]
    s = complex(math.fsum(z.real), math.fsum(z.imag))
    # product in log form to stay in range
    logp = complex(np.sum(np.log(z)))
    p_rel = abs(cmath.exp(logp - cmath.log(p_exact)) - 1)
    return abs(s - s_exact) / abs(s_exact), p_rel


SUITES = {"periods": period_suite, "gates": gate_suite, "bessel": bessel_suite}
