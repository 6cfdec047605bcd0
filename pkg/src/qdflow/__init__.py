"""Trajectories of the quadratic differentials lambda^2 (z-a)(z-b)/z^4 dz^2,
their short trajectories, and the zeros of generalized Bessel polynomials
that accumulate on them."""
from . import errors
from .bessel import (BesselPolynomial, EmpiricalMeasure, FamilyParameter, algebraic_residual,
                     bessel_coeffs, bessel_eval, bessel_zeros, cauchy_transform, family_quaddiff,
                     family_zeros, overlay_distance)
from .motherbody import AlgebraicEquation, density_along, discriminant, masses, to_quaddiff
from .quaddiff import (QuadDiff, critical_graph, gate_values, period, short_trajectory_exists,
                       trace, validate_face)
from .render import Scene, render_svg

__version__ = "0.1.0"
