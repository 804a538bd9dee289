"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """An input vector's dimension does not match the operand's."""


class InvalidParameterError(ValueError):
    """A parameter violates its documented precondition."""


class DegeneratePolynomialError(ValueError):
    """All polynomial coefficients are zero."""


class NonconvexSubproblemError(ValueError):
    """A model step was requested with beta <= eta, so the subproblem
    is not strongly convex and the theory contract is violated."""


class UnsupportedCombinationError(ValueError):
    """No solver is available for the requested (family, problem,
    regularizer) combination."""


class ToleranceNotMetError(RuntimeError):
    """A certified solve failed to reach the requested suboptimality
    within its iteration budget."""


class DivergedRunError(RuntimeError):
    """An algorithm run produced a non-finite iterate.

    Carries the step index at which divergence was detected.
    """

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"run diverged at step {step}")


class TrajectoryNotRetainedError(ValueError):
    """An operation needed the full trajectory but the run did not
    retain it."""


class ConfigValidationError(ValueError):
    """A sweep configuration violates an invariant.

    Carries the dotted field name that failed validation.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
