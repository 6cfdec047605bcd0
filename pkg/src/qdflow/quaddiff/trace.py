"""Tracing horizontal and vertical trajectories of a QuadDiff.

A trajectory is a level curve of Im F (horizontal) or Re F (vertical), where
F(z) is the integral of w = sqrt(phi) continued along the path.  Each step is
a Dormand-Prince prediction along the unit field rot * conj(w) / |w|,
followed by a Newton correction across the curve that restores the conserved
part of F (accumulated by Gauss-Legendre on the step chord).  The conserved
quantity therefore never drifts, which is what makes endpoint classification
near the zeros reliable.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..cxnum import (BranchTracker, Path, TrackedSqrt, as_complex, gauss_legendre,
                     integrate_path_cumulative, is_continuous, nearest_root,
                     ode_step_adaptive, sqrt_continuous)
from ..errors import LaunchFromPole, StepUnderflow
from .core import QuadDiff, _zero_label, infinity_form, launch_directions

log = logging.getLogger(__name__)

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


@dataclass(frozen=True)
class TraceConfig:
    tol: float = 1e-9            # path tolerance (Dormand-Prince local error)
    rel_step: float = 0.2        # step <= rel_step * distance to the nearest critical point
    max_step: float = 0.05       # step <= max_step * scale * max(1, |z| / scale)
    eps_zero: float = 1e-8
    eps_origin: float = 1e-6
    origin_run: int = 50
    r_max_factor: float = 1e6
    far_factor: float = 2.2      # escape certified beyond far_factor * scale / drift
    far_run: int = 10
    far_min_drift: float = 1e-6
    log_chart: float = 8.0       # beyond log_chart * scale, step in log z
    log_step: float = 0.5        # step cap in the log chart
    max_steps: int = 40000
    launch_offset: float = 1e-6
    capture_radius: float = 0.05
    nodes: int = 8

    def tightened(self, factor: float = 10.0) -> "TraceConfig":
        return replace(self, tol=self.tol / factor, rel_step=self.rel_step / 2)


DEFAULT_CONFIG = TraceConfig()


@dataclass(frozen=True)
class Endpoint:
    kind: str                      # hits_zero | to_origin | to_infinity | closed | truncated
    zero: Optional[str] = None     # which zero, for hits_zero
    distance: Optional[float] = None
    direction: Optional[float] = None   # arg z at termination, for to_origin
    form: Optional[str] = None     # radial | circular | log_spiral, for to_infinity
    reason: Optional[str] = None   # budget | max_steps | step_underflow

    def to_dict(self):
        return {k: v for k, v in self.__dict__.items() if v is not None}


@dataclass(frozen=True)
class Launch:
    zero: Optional[str]
    point: complex
    angle: float

    def to_dict(self):
        return {"zero": self.zero, "point": [self.point.real, self.point.imag],
                "angle": self.angle}


@dataclass(frozen=True)
class TrajectoryPath:
    path: Path
    kind: str
    launch: Launch
    endpoint: Endpoint
    levels: np.ndarray          # F at each vertex, measured from the launch point
    roots: np.ndarray           # tracked sqrt(phi) at each vertex (0 at a zero)
    approach: dict              # closest distance to each zero ("a", "b")
    arc_length: float
    max_step: float
    warnings: tuple = field(default=())

    @property
    def points(self) -> np.ndarray:
        return self.path.points

    @property
    def rotation(self) -> complex:
        return 1.0 if self.kind == HORIZONTAL else 1j

    def to_dict(self, with_points: bool = True):
        out = {"kind": self.kind, "launch": self.launch.to_dict(),
               "endpoint_class": self.endpoint.to_dict(),
               "arc_length": self.arc_length}
        if with_points:
            out["points"] = [[p.real, p.imag] for p in self.points.tolist()]
        return out


def _rotation(kind: str) -> complex:
    if kind not in (HORIZONTAL, VERTICAL):
        raise ValueError(f"kind must be horizontal or vertical, got {kind!r}")
    return 1.0 if kind == HORIZONTAL else 1j


def _conserved(F: complex, rot: complex) -> float:
    return (F * rot.conjugate()).imag


def from_zero(qd: QuadDiff, label: str, z: complex, w_z: complex, nodes: int = 16) -> complex:
    """F(z) - F(zeta) along the straight segment from the zero ``zeta`` to ``z``.

    The branch is the one whose value at ``z`` is ``w_z``.  With
    t = zeta + (z - zeta) s^2 the integrand is analytic in s, so Gauss-Legendre
    converges geometrically; ``z`` must be closer to ``zeta`` than to the other
    zero and than half of |zeta|.
    """
    zeta = qd.zero(label)
    other = qd.b if label == "a" else qd.a
    d = z - zeta
    rho = cmath.sqrt(d)
    sigma0 = w_z * z * z / (qd.lam * rho)
    x, wts = gauss_legendre(nodes)
    s = 0.5 * (x + 1.0)
    t = zeta + d * s * s
    ratio = 1.0 + (t - z) / (z - other)
    w_t = qd.lam * s * rho * sigma0 * np.sqrt(ratio) / (t * t)
    return complex(0.5 * np.dot(wts, w_t * 2.0 * d * s))


def chord_integral(qd: QuadDiff, z0: complex, z1: complex, w0: complex, nodes: int = 8):
    """Integral of the tracked root from z0 to z1 (short chord); returns (value, ok)."""
    x, wts = gauss_legendre(nodes)
    pts = z0 + (z1 - z0) * 0.5 * (x + 1.0)
    raw = np.sqrt(qd.phi(pts))
    prev = w0
    tracked = np.empty_like(raw)
    for k, r in enumerate(raw):
        w = r if (r * prev.conjugate()).real >= 0.0 else -r
        if not is_continuous(w, prev):
            return 0j, False
        tracked[k] = w
        prev = w
    return complex(0.5 * (z1 - z0) * np.dot(wts, tracked)), True


def log_chord_integral(qd: QuadDiff, s0: complex, s1: complex, w0: complex, nodes: int = 8):
    """As :func:`chord_integral` along the image of the chord s0 -> s1 under exp."""
    x, wts = gauss_legendre(nodes)
    zs = np.exp(s0 + (s1 - s0) * 0.5 * (x + 1.0))
    raw = np.sqrt(qd.phi(zs))
    prev = w0
    tracked = np.empty_like(raw)
    for k, r in enumerate(raw):
        w = r if (r * prev.conjugate()).real >= 0.0 else -r
        if not is_continuous(w, prev):
            return 0j, False
        tracked[k] = w
        prev = w
    return complex(0.5 * (s1 - s0) * np.dot(wts, tracked * zs)), True


class _Tracer:
    def __init__(self, qd: QuadDiff, kind: str, cfg: TraceConfig, budget: float):
        self.qd = qd
        self.kind = kind
        self.rot = _rotation(kind)
        self.cfg = cfg
        self.budget = budget
        self.L = qd.scale
        self.lam_eff = qd.lam * self.rot.conjugate()
        self.form = infinity_form(qd, kind)
        sep = abs(qd.a - qd.b)
        self.r_cap = {lab: cfg.capture_radius * min(sep, abs(qd.zero(lab))) for lab in "ab"}

    def direction(self, p: complex, w_ref: complex) -> complex:
        w = nearest_root(complex(self.qd.phi(p)), w_ref)
        return self.rot * w.conjugate() / abs(w)

    def in_log_chart(self, z: complex) -> bool:
        return abs(z) > self.cfg.log_chart * self.L

    def step_cap(self, z: complex) -> float:
        """Step cap in the chart used at z (z itself, or log z far out)."""
        qd = self.qd
        rho = min(abs(z), abs(z - qd.a), abs(z - qd.b))
        if self.in_log_chart(z):
            return min(self.cfg.rel_step * rho / abs(z), self.cfg.log_step)
        return min(self.cfg.rel_step * rho, self.abs_cap(z))

    def abs_cap(self, z: complex) -> float:
        if self.in_log_chart(z):
            return abs(z) * math.expm1(self.cfg.log_step)
        return self.cfg.max_step * self.L * max(1.0, abs(z) / self.L)

    def predict(self, z: complex, w: complex, h: float, log_chart: bool):
        if not log_chart:
            return ode_step_adaptive(lambda p: self.direction(p, w), z, h, self.cfg.tol)

        def field(q):
            v = self.direction(cmath.exp(q), w) * cmath.exp(-q)
            return v / abs(v)

        s_new, h_next = ode_step_adaptive(field, cmath.log(z), h, self.cfg.tol)
        return cmath.exp(s_new), h_next

    def correct(self, z_prev, w_prev, F_prev, z_new, w_new, log_chart=False):
        """Newton-correct z_new across the trajectory; returns (z, w, F) or None."""
        cfg, qd = self.cfg, self.qd
        if log_chart:
            s_prev = cmath.log(z_prev)
            s_new = s_prev + cmath.log(z_new / z_prev)

            def chord(_z):
                return log_chord_integral(qd, s_prev, s_new, w_prev, cfg.nodes)
        else:
            def chord(z):
                return chord_integral(qd, z_prev, z, w_prev, cfg.nodes)
        dF, ok = chord(z_new)
        if not ok:
            return None
        F = F_prev + dF
        for _ in range(4):
            e = _conserved(F, self.rot)
            if abs(e) <= 1e-15 * max(1.0, abs(F)):
                break
            dz = -1j * self.rot * e / w_new
            if abs(dz) > 0.25 * abs(z_new - z_prev):
                return None
            if log_chart:
                s_new = s_new + dz / z_new
                z_new = cmath.exp(s_new)
            else:
                z_new = z_new + dz
            w_new = nearest_root(complex(qd.phi(z_new)), w_new)
            dF, ok = chord(z_new)
            if not ok:
                return None
            F = F_prev + dF
        return z_new, w_new, F

    def run(self, start: complex, angle: float, launch_zero: Optional[str]) -> TrajectoryPath:
        qd, cfg, rot = self.qd, self.cfg, self.rot
        warnings = []
        if launch_zero is not None:
            zeta = qd.zero(launch_zero)
            delta = cfg.launch_offset * max(1.0, abs(qd.a - qd.b))
            e_dir = cmath.exp(1j * angle)
            z = zeta + delta * e_dir
            w = cmath.sqrt(qd.phi(z))
            if (rot * w.conjugate() * e_dir.conjugate()).real < 0.0:
                w = -w
            F = from_zero(qd, launch_zero, z, w)
            for _ in range(3):
                z = z - 1j * rot * _conserved(F, rot) / w
                w = nearest_root(complex(qd.phi(z)), w)
                F = from_zero(qd, launch_zero, z, w)
            pts, levels, roots = [zeta, z], [0j, F], [0j, w]
            h = 0.5 * delta
        else:
            z = start
            w = cmath.sqrt(qd.phi(z))
            if (rot * w.conjugate() * cmath.exp(-1j * angle)).real < 0.0:
                w = -w
            F = 0j
            pts, levels, roots = [z], [F], [w]
            h = 1e-3 * self.step_cap(z)

        approach = {"a": math.inf, "b": math.inf}
        left_launch = launch_zero is None
        arc = abs(pts[-1] - pts[0])
        origin_run = far_run = 0
        steps = 0
        biggest = arc
        endpoint = None
        r_max = cfg.r_max_factor * self.L
        # Far out, w = (lam / z)(1 + O(scale / |z|)): the radial speed is
        # +-drift up to an error below scale / |z|, so beyond r_far an outward
        # moving trajectory can only keep moving out.
        drift = abs(self.lam_eff.real) / abs(self.lam_eff)
        r_far = cfg.far_factor * self.L / max(drift, 1e-300)
        log_chart = False

        while endpoint is None:
            if steps >= cfg.max_steps:
                endpoint = Endpoint("truncated", reason="max_steps")
                break
            if arc >= self.budget * (1 - 1e-9):
                endpoint = Endpoint("truncated", reason="budget")
                break
            chart = self.in_log_chart(z)
            if chart != log_chart:
                h = h / abs(z) if chart else h * abs(z)
                log_chart = chart
            h = min(h, self.step_cap(z))
            # do not step past the arc-length budget
            rest = self.budget - arc
            h = min(h, rest / abs(z) if log_chart else rest)
            try:
                z_new, h_next = self.predict(z, w, h, log_chart)
            except StepUnderflow as exc:
                warnings.append(f"step underflow at z={exc.z!r}")
                endpoint = Endpoint("truncated", reason="step_underflow")
                break
            w_new = nearest_root(complex(qd.phi(z_new)), w)
            fixed = None
            if is_continuous(w_new, w):
                fixed = self.correct(z, w, F, z_new, w_new, log_chart)
            if fixed is None:
                h = 0.5 * (abs(cmath.log(z_new / z)) if log_chart else abs(z_new - z))
                continue
            z_prev, w_prev, F_prev = z, w, F
            z, w, F = fixed
            steps += 1
            ds = abs(z - z_prev)
            arc += ds
            biggest = max(biggest, ds / self.abs_cap(z_prev))
            pts.append(z)
            levels.append(F)
            roots.append(w)
            h = h_next

            # finite critical points
            for lab in "ab":
                zeta = qd.zero(lab)
                dist = abs(z - zeta)
                if lab == launch_zero and not left_launch:
                    if dist > self.r_cap[lab]:
                        left_launch = True
                    continue
                approach[lab] = min(approach[lab], dist)
                if dist >= self.r_cap[lab]:
                    continue
                G = -from_zero(qd, lab, z, w) * rot.conjugate()
                if G.real <= 0.0:
                    continue
                predicted = dist * (abs(G.imag) / abs(G)) ** (2.0 / 3.0)
                approach[lab] = min(approach[lab], predicted)
                if predicted < cfg.eps_zero:
                    self._finish_at_zero(lab, pts, levels, roots)
                    endpoint = Endpoint("hits_zero", zero=lab, distance=predicted)
                    break
            if endpoint is not None:
                break

            # order-4 pole at the origin
            origin_run = origin_run + 1 if abs(z) < abs(z_prev) else 0
            if abs(z) < cfg.eps_origin and origin_run >= cfg.origin_run:
                endpoint = Endpoint("to_origin", direction=cmath.phase(z))
                break

            # order-2 pole at infinity
            if abs(z) > r_max:
                endpoint = Endpoint("to_infinity", form=self.form)
                break
            if abs(z) > r_far and drift > cfg.far_min_drift:
                u = self.direction(z, w)
                radial = (z.conjugate() * u).real / abs(z)
                far_run = far_run + 1 if radial > 0.5 * drift else 0
                if far_run >= cfg.far_run:
                    endpoint = Endpoint("to_infinity", form=self.form)
                    break

            if launch_zero is None and arc > 10 * cfg.eps_zero and steps > 2:
                if abs(z_prev - start) <= 3.0 * ds + cfg.eps_zero:
                    H, ok = chord_integral(qd, z_prev, start, w_prev, cfg.nodes)
                    hh = H * rot.conjugate()
                    step_gain = ((F - F_prev) * rot.conjugate()).real
                    if ok and abs(hh.imag) < cfg.eps_zero * abs(w_prev) and 0.0 <= hh.real <= step_gain:
                        pts[-1] = start
                        levels[-1] = F_prev + H
                        endpoint = Endpoint("closed", distance=abs(z - start))
                        break

        if endpoint.kind == "truncated":
            # running out of an explicit budget is routine; anything else is worth a warning
            level = logging.INFO if endpoint.reason == "budget" else logging.WARNING
            log.log(level, "trajectory truncated (%s) after %d steps", endpoint.reason, steps)
            warnings.append(f"truncated: {endpoint.reason}")
        return TrajectoryPath(
            path=Path(np.array(pts), closed=endpoint.kind == "closed"),
            kind=self.kind,
            launch=Launch(launch_zero, complex(pts[0]), angle),
            endpoint=endpoint,
            levels=np.array(levels),
            roots=np.array(roots),
            approach=approach,
            arc_length=arc,
            max_step=biggest,
            warnings=tuple(warnings),
        )

    def _finish_at_zero(self, lab, pts, levels, roots):
        # Final approach on the level curve itself: solve F(p) = target by
        # Newton, with F - F(zeta) shrinking geometrically (|p - zeta| ~ t^(2/3)).
        qd, rot = self.qd, self.rot
        zeta = qd.zero(lab)
        z, w, F = pts[-1], roots[-1], levels[-1]
        G = from_zero(qd, lab, z, w)
        F_zeta = F - G
        g = G * rot.conjugate()
        d = z - zeta
        q = 1.0 - self.cfg.rel_step
        k = 1
        while abs(d) * q ** k > self.cfg.eps_zero:
            t = q ** (1.5 * k)
            target = (t * g.real + 1j * g.imag) * rot
            p = zeta + d * t ** (2.0 / 3.0)
            wp = w * cmath.sqrt((p - zeta) / d)
            for _ in range(8):
                wp = nearest_root(complex(qd.phi(p)), wp)
                dp = (from_zero(qd, lab, p, wp) - target) / wp
                p -= dp
                if abs(dp) <= 1e-15 * abs(p - zeta):
                    break
            wp = nearest_root(complex(qd.phi(p)), wp)
            pts.append(p)
            roots.append(wp)
            levels.append(F_zeta + from_zero(qd, lab, p, wp))
            k += 1
        pts.append(zeta)
        roots.append(0j)
        levels.append(F_zeta)


def default_budget(qd: QuadDiff) -> float:
    return 1e7 * qd.scale


def trace(qd: QuadDiff, start, direction: float, kind: str = HORIZONTAL,
          budget: Optional[float] = None, config: Optional[TraceConfig] = None) -> TrajectoryPath:
    """Trace the trajectory through ``start`` leaving in (about) ``direction``.

    If ``start`` is one of the zeros, ``direction`` is snapped to the nearest of
    the three launch directions and the trajectory is launched from a point
    at distance ``launch_offset * max(1, |a - b|)`` along that ray.
    """
    cfg = config or DEFAULT_CONFIG
    budget = default_budget(qd) if budget is None else float(budget)
    if budget <= 0:
        raise ValueError("budget must be positive")
    start = as_complex(start)
    if abs(start) < 1e-10:
        raise LaunchFromPole("cannot launch a trajectory from the pole at the origin")
    tracer = _Tracer(qd, kind, cfg, budget)
    try:
        label = _zero_label(qd, start)
    except ValueError:
        label = None
    angle = float(direction)
    if label is not None:
        angles = launch_directions(qd, label, kind)
        gaps = [abs(cmath.phase(cmath.exp(1j * (t - angle)))) for t in angles]
        best = int(np.argmin(gaps))
        if gaps[best] > 1e-6:
            log.info("launch direction %.6f snapped to %.6f", angle, angles[best])
        angle = angles[best]
    return tracer.run(start, angle, label)


def conserved_deviation(qd: QuadDiff, traj: TrajectoryPath, nodes: int = 16) -> float:
    """Worst drift of the conserved part of F along the polyline, recomputed
    independently by tracked Gauss-Legendre quadrature of
    lambda sqrt((t-a)(t-b)) / t^2 over every segment."""
    pts = traj.points
    rot = traj.rotation
    lo, hi = 0, pts.size
    base = 0j
    if traj.launch.zero is not None:
        lo = 1
        base = from_zero(qd, traj.launch.zero, complex(pts[1]), complex(traj.roots[1]))
    tail = None
    if traj.endpoint.kind == "hits_zero":
        hi = pts.size - 1
        tail = traj.endpoint.zero
    body = pts[lo:hi]
    seed = complex(traj.roots[lo]) * complex(body[0]) ** 2 / qd.lam
    a, b, lam = qd.a, qd.b, qd.lam
    integrand = TrackedSqrt(lambda z: (z - a) * (z - b), factor=lambda z: lam / (z * z), seed=seed)
    cum = base + integrate_path_cumulative(integrand, Path(body), nodes)
    vals = [_conserved(c, rot) for c in cum]
    if tail is not None:
        z_last = complex(body[-1])
        w_last = integrand.end_value * lam / (z_last * z_last)
        vals.append(_conserved(cum[-1] - from_zero(qd, tail, z_last, w_last), rot))
    return float(np.max(np.abs(vals)))
