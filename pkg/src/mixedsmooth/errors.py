"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument violates a documented precondition (dimension mismatch,
    index out of range, unsupported parameter value)."""


class EvalDomainError(ArithmeticError):
    """Evaluating an expression hit a point outside a primitive's domain
    (log/sqrt of a nonpositive value, division by zero, overflow).

    Carries the offending AST node and, when known, the sample point.
    """

    def __init__(self, message: str, node=None, point=None):
        super().__init__(message)
        self.node = node
        self.point = point

    def __str__(self) -> str:
        base = super().__str__()
        if self.point is not None:
            return f"{base} at point {tuple(self.point)}"
        return base


class ExprParseError(ValueError):
    """Raised by the expression parser; ``diagnostic`` holds the structured
    offset/message/expected-token record."""

    def __init__(self, diagnostic):
        super().__init__(f"{diagnostic.message} (offset {diagnostic.offset})")
        self.diagnostic = diagnostic


class QuadratureNonConvergence(RuntimeError):
    """Composite refinement did not reach the requested tolerance.

    ``last`` and ``previous`` are the two most recent level values so the
    caller can report how far the refinement got; verification code maps
    this to an INCONCLUSIVE verdict, never to FAIL.
    """

    def __init__(self, message: str, last: float, previous: float, evaluations: int):
        super().__init__(message)
        self.last = last
        self.previous = previous
        self.evaluations = evaluations
