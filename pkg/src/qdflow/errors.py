"""Exception hierarchy shared by all qdflow modules."""


class QdflowError(Exception):
    """Base class for every error raised by the package."""


class DegenerateParameters(QdflowError, ValueError):
    """Parameters violate a non-degeneracy constraint.

    ``violations`` lists each broken constraint by name, e.g. ``["a=b"]``.
    """

    def __init__(self, violations, message=None):
        self.violations = list(violations)
        super().__init__(message or "degenerate parameters: " + ", ".join(self.violations))


class TrackerUninitialized(QdflowError, RuntimeError):
    pass


class NonFiniteSample(QdflowError, ArithmeticError):
    pass


class StepUnderflow(QdflowError, ArithmeticError):
    def __init__(self, z, h):
        self.z = z
        self.h = h
        super().__init__(f"step size {h:.3e} underflowed near z={z!r}")


class LaunchFromPole(QdflowError, ValueError):
    pass


class OpenBoundary(QdflowError, ValueError):
    pass


class OriginEvaluation(QdflowError, ValueError):
    pass


class DegenerateDiscriminant(DegenerateParameters):
    pass


class NotShortTrajectory(QdflowError, ValueError):
    pass


class NoShortTrajectory(QdflowError, LookupError):
    pass


class SupportCollision(QdflowError, ValueError):
    pass


class NoConvergence(QdflowError, RuntimeError):
    def __init__(self, message, worst_residual=None):
        self.worst_residual = worst_residual
        super().__init__(message)


class EvaluationOverflow(QdflowError, OverflowError):
    pass


class EmptyScene(QdflowError, ValueError):
    pass
