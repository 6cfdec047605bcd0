"""Acceptance criteria 1-10, one test each, at the stated tolerances.

Each test records a PASS/FAIL line that is printed in the pytest summary.
"""
import json
import math
import time

import numpy as np
import pytest

from qdflow.bessel import FamilyParameter, algebraic_residual, overlay_distance, point_to_polyline
from qdflow.cli import main
from qdflow.motherbody import AlgebraicEquation, density_along
from qdflow.quaddiff import QuadDiff, critical_graph, validate_face
from qdflow.verify import (bessel_suite, gate_suite, period_suite, random_pair, threshold_phase)


def test_1_period_oracle(record):
    t0 = time.perf_counter()
    res = period_suite(samples=100, seed=7)
    elapsed = time.perf_counter() - t0
    quad, diff = res.checks[0].value, res.checks[1].value
    ok = quad <= 1e-8 and diff <= 1e-10 and elapsed < 10
    record(1, ok, f"quadrature rel {quad:.1e} (<=1e-8), plus-minus rel {diff:.1e} (<=1e-10), "
                  f"{elapsed:.1f} s (<10 s)")
    assert ok


def test_2_gate_trace_agreement(record):
    t0 = time.perf_counter()
    res = gate_suite(samples=200, seed=11)
    elapsed = time.perf_counter() - t0
    agree, off = res.checks
    ok = agree.passed and off.value == 0 and elapsed < 120
    record(2, ok, f"agreement {agree.detail} (>=198), off-threshold disagreements {int(off.value)}, "
                  f"{elapsed:.1f} s (<120 s)")
    assert ok


def test_3_threshold_sharpness(record):
    rng = np.random.default_rng(3)
    worst, found, skipped = 0.0, 0, 0
    while found < 10:
        a, b = random_pair(rng)
        r = threshold_phase(a, b)
        if r is None:           # the finite trajectory at the root is a loop
            skipped += 1
            continue
        found += 1
        worst = max(worst, r.relative_re)
    ok = worst < 1e-4
    record(3, ok, f"worst |Re v(beta*)|/|v| = {worst:.1e} (<1e-4) over 10 pairs")
    assert ok


FAMILY_COUNTS = [(3, 2), (-1.01, 2), (5, 2), (-1 + 0.1j, 1), (-2 + 2j, 1), (1 + 1j, 1)]


def test_4_family_dichotomy(record, family_graph):
    got = {A: len(family_graph(A).short_trajectories) for A, _ in FAMILY_COUNTS}
    ok = all(got[A] == n for A, n in FAMILY_COUNTS)
    record(4, ok, "counts " + ", ".join(f"A={A}: {got[A]}" for A, _ in FAMILY_COUNTS))
    assert ok


def test_5_bessel_identities(record):
    res = bessel_suite(samples=50, seed=5)
    worst_id = max(c.value for c in res.checks if "residual" in c.name)
    worst_v = max(c.value for c in res.checks if "Vieta" in c.name)
    ok = res.passed and worst_id <= 1e-10 and worst_v <= 1e-8
    record(5, ok, f"identity residuals {worst_id:.1e} (<=1e-10), Vieta {worst_v:.1e} (<=1e-8)")
    assert ok


ALG_POINTS = (2 + 2j, -2 + 1j, 1.5 - 2j)


def test_6_algebraic_convergence(record, family_graph):
    t0 = time.perf_counter()
    lines, ok = [], True
    for A in (3, -2 + 2j):
        g = family_graph(A)
        support = np.concatenate([st.path.points for st in g.short_trajectories])
        for z in ALG_POINTS:
            assert point_to_polyline(np.array([z]), support)[0] >= 0.2
            r = [algebraic_residual(FamilyParameter(A), n, z) for n in (20, 40, 80)]
            good = r[0] > r[1] > r[2] and r[2] <= 0.6 * r[0]
            ok &= good
            lines.append(f"{r[2] / r[0]:.2f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    record(6, ok, f"r80/r20 = {', '.join(lines)} (<=0.6, strictly decreasing), {elapsed:.1f} s (<60 s)")
    assert ok


def test_7_zero_clustering(record, family_graph):
    A = FamilyParameter(-1 + 0.1j)
    g = family_graph(A.A)
    d = {n: overlay_distance(A, n, g).mean_dist for n in (20, 40, 60, 80)}
    ok = d[80] < d[20] and d[60] <= 0.05
    record(7, ok, "mean distance " + ", ".join(f"n={n}: {v:.3f}" for n, v in d.items())
           + " (n=60 <= 0.05, decreasing)")
    assert ok


def test_8_density_normalisation(record, family_graph):
    out = {}
    for A in (-1 + 0.1j, -2 + 2j):
        eq = AlgebraicEquation(-A, -1, -(A + 1))
        (st,) = family_graph(A).short_trajectories
        out[A] = density_along(eq, st.path).total_mass
    ok = all(abs(m - 1) < 1e-3 for m in out.values())
    record(8, ok, "total mass " + ", ".join(f"A={A}: {m:.6f}" for A, m in out.items()) + " (|m-1|<1e-3)")
    assert ok


def test_9_teichmuller_faces(record):
    res = []
    for a, b in ((1 - 1j, 1j), (3j, 1 - 1j)):
        g = critical_graph(QuadDiff.from_lambda2(-2 - 1j, a, b))
        idx = [i for i, t in enumerate(g.trajectories)
               if t.launch.zero == "a" and t.endpoint.kind == "to_origin"]
        f = validate_face(g, [(idx[0], False), (idx[1], True)])
        theta0 = dict(zip([c.label for c in f.corners], f.corner_angles))["origin"]
        res.append((theta0 / math.pi, f.sum_rule_residual))
    ok = all(r < 0.05 for _, r in res) and abs(res[0][0] - 1) < 0.01 and abs(res[1][0] - 2) < 0.01
    record(9, ok, "; ".join(f"theta0={t:.3f} pi residual {r:.1e}" for t, r in res) + " (<0.05)")
    assert ok


def _run_twice(tmp_path, args):
    outs = []
    for k in range(2):
        j, s = tmp_path / f"{k}.json", tmp_path / f"{k}.svg"
        assert main([*args, "--json", str(j), "--svg", str(s)]) == 0
        outs.append((j.read_bytes(), s.read_bytes()))
    return outs[0] == outs[1], outs[0]


def test_10_rendering_determinism(record, tmp_path):
    from pathlib import Path
    ok = True
    ok &= _run_twice(tmp_path, ["graph", "--lambda2", "-2,-1", "--a", "1,-1", "--b", "0,1"])[0]
    counts = {}
    golden = Path(__file__).parent / "golden"
    for A, name in (("3,0", "family_3.svg"), ("-2,2", "family_m2p2i.svg")):
        same, (js, svg) = _run_twice(tmp_path, ["family", "--A", A])
        ok &= same and svg == (golden / name).read_bytes()
        counts[A] = svg.count(b'class="trajectory short"')
    ok &= counts == {"3,0": 2, "-2,2": 1}
    record(10, ok, f"byte-identical reruns and goldens; short paths {counts['3,0']} and {counts['-2,2']}")
    assert ok
