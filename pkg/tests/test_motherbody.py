import cmath
import math

import numpy as np
import pytest

from qdflow.errors import (DegenerateDiscriminant, DegenerateParameters, NotShortTrajectory,
                           OriginEvaluation)
from qdflow.motherbody import (AlgebraicEquation, branch_at_origin, density_along, discriminant,
                               masses, pointwise_residual, solve_pointwise, to_quaddiff)


def bessel_eq(A):
    return AlgebraicEquation(-A, -1, -(A + 1))


def test_zero_coefficients_rejected():
    with pytest.raises(DegenerateParameters) as exc:
        AlgebraicEquation(0, 1, 0)
    assert exc.value.violations == ["p=0", "r=0"]


def test_discriminant_vieta(rng):
    for _ in range(20):
        p, q, r = (complex(*rng.normal(size=2)) for _ in range(3))
        d = discriminant(AlgebraicEquation(p, q, r))
        z1, z2 = d.roots
        assert abs(z1 + z2 + d.c1 / d.c2) < 1e-10 * max(1, abs(d.c1 / d.c2))
        assert abs(z1 * z2 - d.c0 / d.c2) < 1e-10 * max(1, abs(d.c0 / d.c2))


def test_discriminant_linear_case():
    d = discriminant(AlgebraicEquation(2, 1, 1))
    assert d.c2 == 0 and len(d.roots) == 1
    assert abs(d.roots[0] + 0.25) < 1e-15


def test_solve_pointwise_hand_quadratic():
    cp, cm = solve_pointwise(AlgebraicEquation(2, 1, 1), 1)
    assert {round(cp.real, 12), round(cm.real, 12)} == {round((3 + math.sqrt(5)) / 2, 12),
                                                       round((3 - math.sqrt(5)) / 2, 12)}


def test_solve_pointwise_bessel_three():
    cp, cm = solve_pointwise(bessel_eq(3), 1)
    want = {-2 + 2 * math.sqrt(2), -2 - 2 * math.sqrt(2)}
    assert min(abs(cp - w) for w in want) < 1e-12
    assert min(abs(cm - w) for w in want) < 1e-12


def test_solve_pointwise_residual(rng):
    for _ in range(20):
        eq = AlgebraicEquation(*(complex(*rng.normal(size=2)) for _ in range(3)))
        z = complex(*rng.normal(size=2))
        for C in solve_pointwise(eq, z):
            assert pointwise_residual(eq, z, C) < 1e-10


def test_solve_pointwise_origin():
    with pytest.raises(OriginEvaluation):
        solve_pointwise(bessel_eq(3), 0)


@pytest.mark.parametrize("A", [3, -1.5, 0.5 + 2j, -2 + 2j])
def test_bessel_masses(A):
    m = masses(bessel_eq(A))
    got = sorted([m.m_plus, m.m_minus], key=lambda v: (v.real, v.imag))
    want = sorted([1, -(A + 1)], key=lambda v: (complex(v).real, complex(v).imag))
    assert all(abs(g - w) < 1e-12 for g, w in zip(got, want))
    assert m.real_mass_exists


def test_double_root_masses_not_real():
    m = masses(AlgebraicEquation(2j, 1, -1))
    assert abs(m.m_plus - 1j) < 1e-12 and abs(m.m_minus - 1j) < 1e-12
    assert not m.real_mass_exists
    with pytest.raises(DegenerateDiscriminant):
        to_quaddiff(AlgebraicEquation(2j, 1, -1))


def test_to_quaddiff_factorisation():
    eq = AlgebraicEquation(1 + 2j, -0.5, 3 - 1j)
    qd = to_quaddiff(eq)
    z = 1 + 1j
    assert abs(-eq.D(z) / z ** 4 - qd.phi(z)) < 1e-12


def test_to_quaddiff_bessel_three():
    qd = to_quaddiff(bessel_eq(3))
    assert abs(qd.lam ** 2 + 25) < 1e-12
    assert {complex(round(v.real, 12), round(v.imag, 12)) for v in (qd.a, qd.b)} == \
        {(-3 - 4j) / 25, (-3 + 4j) / 25}


@pytest.mark.parametrize("A", [-1 + 0.1j, -2 + 2j])
def test_density_unit_mass(family_graph, A):
    eq = bessel_eq(A)
    (st,) = family_graph(A).short_trajectories
    d = density_along(eq, st.path)
    assert abs(d.total_mass - 1) < 1e-3
    assert d.negative_weights == 0
    assert d.imag_fraction < 1e-3


def test_density_bessel_three_matches_masses(family_graph):
    eq = bessel_eq(3)
    m = masses(eq)
    candidates = [abs(m.m_plus), abs(m.m_minus)]
    for st in family_graph(3).short_trajectories:
        d = density_along(eq, st.path)
        assert min(abs(d.total_mass - c) for c in candidates) < 1e-3
        assert d.negative_weights == 0
        # the arc carrying unit mass is the one on which sqrt D(0) = +1 for the
        # root that behaves like (A + 2) z at infinity
        root0 = branch_at_origin(eq, st.path, lead=5)
        assert root0 is not None and abs(abs(root0) - 1) < 1e-9
        assert (abs(d.total_mass - 1) < 1e-3) == (abs(root0 - 1) < 1e-9)


def test_density_rejects_open_curve():
    eq = bessel_eq(3)
    with pytest.raises(NotShortTrajectory):
        density_along(eq, np.array([0.5 + 0.5j, 1 + 1j]))
