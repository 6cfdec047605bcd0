import cmath
import math

import numpy as np
import pytest

from qdflow.cxnum import (BranchTracker, Path, TrackedSqrt, as_complex, integrate_path,
                          integrate_path_cumulative, is_continuous, ode_step_adaptive,
                          sqrt_continuous)
from qdflow.errors import NonFiniteSample, StepUnderflow, TrackerUninitialized


def test_sqrt_keeps_seeded_branch():
    assert sqrt_continuous(4, BranchTracker().seed(2.1)) == 2
    assert sqrt_continuous(4, BranchTracker().seed(-1.9)) == -2


def test_sqrt_monodromy_around_origin():
    tr = BranchTracker().seed(1.0)
    values = []
    for t in np.linspace(0, 2 * math.pi, 101)[1:]:
        values.append(sqrt_continuous(cmath.exp(1j * t), tr))
    assert abs(values[-1] + 1) < 1e-12
    # and the whole history follows exp(it/2)
    exact = np.exp(0.5j * np.linspace(0, 2 * math.pi, 101)[1:])
    assert np.max(np.abs(np.array(values) - exact)) < 1e-12


def test_sqrt_requires_seed():
    with pytest.raises(TrackerUninitialized):
        sqrt_continuous(1.0, BranchTracker())


def test_branch_continuity_property(rng):
    # random smooth loop avoiding the branch points of (z-1)(z+1)
    t = np.linspace(0, 2 * math.pi, 400)
    pts = 3 * np.exp(1j * t) + 0.3 * np.exp(3j * t)
    f = (pts - 1) * (pts + 1)
    tr = BranchTracker().seed(cmath.sqrt(f[0]))
    w = [sqrt_continuous(v, tr) for v in f]
    for w0, w1 in zip(w[:-1], w[1:]):
        assert abs(w1 - w0) < abs(w1 + w0)
        assert is_continuous(w1, w0)


def test_as_complex():
    assert as_complex((1, 2)) == 1 + 2j
    assert as_complex(3) == 3
    with pytest.raises(NonFiniteSample):
        as_complex(float("nan"))


def test_path_validation():
    with pytest.raises(ValueError):
        Path(np.array([0j]))
    with pytest.raises(ValueError):
        Path(np.array([0, 1, 1]))
    with pytest.raises(NonFiniteSample):
        Path(np.array([0, complex("inf")]))
    assert Path.segment(0, 3 + 4j).length == pytest.approx(5.0)


def test_integrate_constant_on_segment():
    assert abs(integrate_path(lambda z: np.ones_like(z), Path.segment(0, 1 + 1j)) - (1 + 1j)) < 1e-15


def test_integrate_residue():
    val = integrate_path(lambda z: 1 / z, Path.circle(0, 1.0, n=64))
    assert abs(val - 2j * math.pi) < 1e-12


def test_quadrature_converges_with_nodes():
    exact = 2j * math.pi
    # a coarse polygon so that the per-segment rule is actually under strain
    path = Path.circle(0, 1.0, n=6)
    errs = [abs(integrate_path(lambda z: 1 / z, path, k) - exact) for k in (2, 4, 8)]
    for e0, e1 in zip(errs[:-1], errs[1:]):
        assert e1 <= max(e0 / 10, 1e-12)


def test_tracked_sqrt_loop_around_slit():
    # clockwise loop around [1, 4] not enclosing 0, sqrt ~ z at infinity:
    # by residues at 0 and infinity the value is i pi / 2 (not 9 i pi / 2,
    # which belongs to the class that also winds around the origin)
    a, b = 1.0, 4.0
    path = Path(2.5 + np.concatenate([2.0 * np.exp(-1j * np.linspace(0, 2 * math.pi, 200))[:-1], [2.0]]),
                closed=True)
    z0 = path.points[0]
    seed = cmath.sqrt((z0 - a) * (z0 - b))
    if (seed / z0).real < 0:
        seed = -seed
    f = TrackedSqrt(lambda z: (z - a) * (z - b), factor=lambda z: 1 / (z * z), seed=seed)
    val = integrate_path(f, path)
    assert abs(val - 0.5j * math.pi) < 1e-12


def test_cumulative_matches_total():
    path = Path(np.array([1, 1 + 1j, 2j, -1 + 0.5j]))
    f = lambda z: np.exp(z)
    cum = integrate_path_cumulative(f, path)
    assert cum[0] == 0
    assert abs(cum[-1] - integrate_path(f, path)) < 1e-14
    assert abs(cum[-1] - (cmath.exp(-1 + 0.5j) - cmath.exp(1))) < 1e-13


def test_ode_constant_field_exact():
    z, h = ode_step_adaptive(lambda z: 1.0, 0j, 0.1, 1e-9)
    assert z == pytest.approx(0.1, abs=1e-16)
    assert h > 0.1


def test_ode_circle_loop():
    field = lambda z: 1j * z / abs(z)
    z, s, h = 1 + 0j, 0.0, 0.01
    total = 2 * math.pi
    while s < total:
        h = min(h, total - s)
        z_new, h_next = ode_step_adaptive(field, z, h, 1e-12)
        s += h
        z, h = z_new, h_next
    assert abs(z - 1) < 1e-8


def test_ode_reversibility():
    field = lambda z: cmath.exp(1j * z.real) * (1 + 0.1 * z.imag)
    z0 = 0.3 + 0.2j
    # steps small enough that every first trial is accepted
    h, z = 0.01, z0
    for _ in range(100):
        z, h_next = ode_step_adaptive(field, z, h, 1e-10)
        assert h_next >= h
    back = lambda w: -field(w)
    for _ in range(100):
        z, _ = ode_step_adaptive(back, z, h, 1e-10)
    assert abs(z - z0) < 1e-6


def test_ode_underflow_at_singular_start():
    # the field is singular at the starting point itself: every trial step fails
    with pytest.raises(StepUnderflow):
        ode_step_adaptive(lambda z: 1 / (z - 1), 1 + 0j, 0.1, 1e-9)


def test_ode_rejects_bad_arguments():
    with pytest.raises(ValueError):
        ode_step_adaptive(lambda z: 1.0, 0j, -1.0, 1e-9)
