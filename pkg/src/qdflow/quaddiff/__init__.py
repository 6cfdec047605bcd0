"""Quadratic differentials lambda^2 (z-a)(z-b)/z^4 dz^2."""
from .core import (INFINITY, CriticalPoint, GateResult, QuadDiff, critical_points, gate_values,
                   infinity_form, launch_directions, period, period_by_quadrature,
                   period_homotopy, qd_new, residue_form, short_trajectory_exists)
from .faces import FaceReport, sum_rule_residual, validate_face
from .graph import CriticalGraph, ShortTrajectory, critical_graph, trajectories_to_infinity
from .trace import (HORIZONTAL, VERTICAL, Endpoint, TraceConfig, TrajectoryPath,
                    conserved_deviation, trace)

__all__ = [
    "INFINITY", "HORIZONTAL", "VERTICAL", "QuadDiff", "CriticalPoint", "GateResult",
    "qd_new", "critical_points", "infinity_form", "gate_values", "short_trajectory_exists",
    "period", "residue_form", "period_homotopy", "period_by_quadrature", "launch_directions",
    "TraceConfig", "Endpoint", "TrajectoryPath", "trace", "conserved_deviation",
    "CriticalGraph", "ShortTrajectory", "critical_graph", "trajectories_to_infinity",
    "FaceReport", "validate_face", "sum_rule_residual",
]
