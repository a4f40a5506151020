"""Exception hierarchy shared by every module."""

from __future__ import annotations


class GHDynError(Exception):
    """Base class for all errors raised by ghdyn."""


# --- metric validation -----------------------------------------------------


class MetricError(GHDynError, ValueError):
    pass


class NotSquare(MetricError):
    pass


class NegativeDistance(MetricError):
    def __init__(self, i: int, j: int, value: float):
        super().__init__(f"negative distance d[{i}][{j}] = {value!r}")
        self.witness = (i, j)


class NonzeroDiagonal(MetricError):
    def __init__(self, i: int, value: float):
        super().__init__(f"d[{i}][{i}] = {value!r} is not zero")
        self.witness = (i,)


class AsymmetricMatrix(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"d[{i}][{j}] != d[{j}][{i}]")
        self.witness = (i, j)


class DuplicatePoints(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"points {i} and {j} are at distance zero")
        self.witness = (i, j)


class TriangleViolation(MetricError):
    """``d[i][j] > d[i][k] + d[k][j] + tol``; ``witness == (i, j, k)``."""

    def __init__(self, i: int, j: int, k: int, excess: float):
        super().__init__(
            f"triangle inequality fails: d[{i}][{j}] exceeds d[{i}][{k}] + d[{k}][{j}] by {excess!r}"
        )
        self.witness = (i, j, k)
        self.excess = excess


# --- generic preconditions -------------------------------------------------


class EmptySet(GHDynError, ValueError):
    pass


class SizeMismatch(GHDynError, ValueError):
    pass


class SpaceMismatch(GHDynError, ValueError):
    pass


class BasepointCountMismatch(GHDynError, ValueError):
    pass


class PreconditionViolated(GHDynError, ValueError):
    pass


class NotAnApproximation(PreconditionViolated):
    pass


class EnumerationBudgetExceeded(GHDynError):
    def __init__(self, needed: int, budget: int):
        super().__init__(f"exhaustive search needs {needed} maps, budget is {budget}")
        self.needed = needed
        self.budget = budget


class SearchFailed(GHDynError):
    pass


class DomainEscape(GHDynError, ValueError):
    pass


# --- dynamics --------------------------------------------------------------


class NonInvertible(GHDynError, ValueError):
    pass


class NonInvertibleNegativeOffset(NonInvertible):
    pass


class NoSeparationWithinBudget(GHDynError):
    pass


class ShadowingFailure(GHDynError):
    """Raised by the conjugacy construction; ``points`` lists the offending q."""

    def __init__(self, message: str, points=()):
        super().__init__(message)
        self.points = list(points)


class NonUniqueShadowing(ShadowingFailure):
    pass


class NoTracer(ShadowingFailure):
    pass


class PseudoOrbitViolation(ShadowingFailure):
    def __init__(self, message: str, points=(), offsets=()):
        super().__init__(message, points)
        self.offsets = list(offsets)


# --- input files -------------------------------------------------------------


class InputError(GHDynError):
    """Unreadable or malformed input file."""
