import cmath

import numpy as np
import pytest

from qdflow.bessel import FamilyParameter, family_quaddiff
from qdflow.quaddiff import critical_graph


@pytest.fixture(scope="session")
def family_graph():
    """Critical graphs of the Bessel family differential, cached per A."""
    cache = {}

    def get(A):
        A = complex(A)
        if A not in cache:
            cache[A] = critical_graph(family_quaddiff(FamilyParameter(A)))
        return cache[A]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def close(z, w, tol):
    return abs(complex(z) - complex(w)) <= tol * max(1.0, abs(complex(w)))


def unit(theta):
    return cmath.exp(1j * theta)


# -- acceptance report ----------------------------------------------------------

_ACCEPTANCE = {}


@pytest.fixture
def record():
    """record(number, passed, detail) -> stores one acceptance line."""

    def _record(number, passed, detail):
        _ACCEPTANCE[number] = (bool(passed), detail)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
