"""Aberth-Ehrlich simultaneous root finding in multiprecision (gmpy2).

The Bessel polynomials of the varying-parameter family are exponentially
ill-conditioned, so roots are computed with a working precision that is
doubled until two consecutive precisions give the same double-precision
answer.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .errors import NoConvergence

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def _horner(coeffs, z):
    # value and derivative of sum coeffs[k] z^k (coeffs ascending)
    p = coeffs[-1]
    dp = mpc(0)
    for c in reversed(coeffs[:-1]):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _initial_guesses(coeffs, n):
    # radius: geometric mean of the root moduli, |c0 / cn|^(1/n), in mpfr
    # (the double-precision ratio can underflow for large n)
    r = gmpy2.exp(gmpy2.log(abs(coeffs[0]) / abs(coeffs[-1])) / n)
    out = []
    for k in range(n):
        t = GOLDEN_ANGLE * k + 0.4
        rk = r * mpfr(1.0 + 0.25 * (k + 0.5) / n)
        out.append(mpc(rk * gmpy2.cos(t), rk * gmpy2.sin(t)))
    return out


def aberth(coeffs, guesses=None, tol_bits=None, max_sweeps=500):
    """Roots of sum coeffs[k] z^k (mpc coefficients, ascending) at the current context.

    Gauss-Seidel Aberth sweeps until every correction is below
    ``2**-tol_bits * (1 + |z|)`` (default: half the working precision; the
    attainable accuracy is limited by the conditioning, and callers certify
    by comparing precisions).  Returns ``(roots, sweeps)``.
    """
    n = len(coeffs) - 1
    if n < 1:
        return [], 0
    prec = gmpy2.get_context().precision
    tol = mpfr(2) ** (-(tol_bits if tol_bits is not None else prec // 2))
    z = list(guesses) if guesses is not None else _initial_guesses(coeffs, n)
    done = [False] * n
    for sweep in range(1, max_sweeps + 1):
        worst = mpfr(0)
        for i in range(n):
            if done[i]:
                continue
            zi = z[i]
            p, dp = _horner(coeffs, zi)
            if p == 0:
                done[i] = True
                continue
            ratio = p / dp
            s = mpc(0)
            for j in range(n):
                if j != i:
                    s += 1 / (zi - z[j])
            corr = ratio / (1 - ratio * s)
            z[i] = zi - corr
            rel = abs(corr) / (1 + abs(z[i]))
            if rel < tol:
                done[i] = True
            worst = max(worst, rel)
        if all(done):
            return z, sweep
    err = NoConvergence(f"Aberth iteration did not converge in {max_sweeps} sweeps",
                        worst_residual=float(worst))
    err.iterates = z
    raise err


def roots_adaptive(make_coeffs: Callable[[int], Sequence], n: int, start_bits=None,
                   max_bits: int = 16384, agree: float = 1e-14, sweeps_per_level: int = 150):
    """Roots (as complex128) of a polynomial given by ``make_coeffs(prec)``.

    ``make_coeffs`` must return ascending mpc coefficients computed at the
    given precision.  The precision is doubled until the double-precision
    roots agree between two consecutive levels; a level at which the
    iteration stalls (precision too low for the conditioning) is skipped,
    its iterates seeding the next level.  Returns ``(roots, bits)``.
    """
    prec = start_bits or max(128, 4 * n)
    prev = None
    guesses = None
    while prec <= max_bits:
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            coeffs = list(make_coeffs(prec))
            if guesses is not None:
                guesses = [mpc(g) for g in guesses]
            try:
                z, _ = aberth(coeffs, guesses, max_sweeps=sweeps_per_level)
            except NoConvergence as exc:
                guesses = exc.iterates
                prev = None
                prec *= 2
                continue
            cur = np.array([complex(v) for v in z])
        if prev is not None:
            # match roots between levels by nearest neighbour
            d = np.abs(cur[:, None] - prev[None, :])
            worst = float(np.max(np.min(d, axis=1)))
            if worst <= agree * max(1e-300, float(np.max(np.abs(cur)))):
                return cur, prec
        prev = cur
        guesses = z
        prec *= 2
    raise NoConvergence(f"roots not stable up to {max_bits} bits of precision")
