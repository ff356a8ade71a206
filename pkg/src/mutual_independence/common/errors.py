"""Exception hierarchy of the toolkit."""
from typing import Any


class MutualIndependenceError(Exception):
    """Base class of every error raised on purpose by the toolkit."""


class InvariantViolation(MutualIndependenceError, ValueError):
    """
    A type invariant does not hold.

    The message always starts with the invariant name so that file readers and pydantic
    validation errors point at the failed rule.
    """

    def __init__(self, invariant: str, detail: str) -> None:
        self.invariant = invariant
        self.detail = detail
        super().__init__(f"{invariant}: {detail}")


class LabelError(InvariantViolation):
    """Unknown, colliding or missing subsystem labels."""

    def __init__(self, detail: str) -> None:
        super().__init__("labels", detail)


class DimensionError(InvariantViolation):
    """Dimensions that do not match, factor or fit."""

    def __init__(self, detail: str) -> None:
        super().__init__("dimensions", detail)


class PreconditionError(MutualIndependenceError, ValueError):
    """An operation precondition on its (otherwise valid) input fails."""


class DecompositionError(MutualIndependenceError, ValueError):
    """A decomposition (classical redundancy or twisting normal form) does not reconstruct its input."""


class NonConvergenceError(MutualIndependenceError, RuntimeError):
    """An optimizer exhausted its iteration cap in every restart."""

    def __init__(self, message: str, partial: Any = None) -> None:
        self.partial = partial
        super().__init__(message)


class GeneratorError(MutualIndependenceError, RuntimeError):
    """An extension generator broke its own contract; never a conjecture violation."""


class JobError(MutualIndependenceError, RuntimeError):
    """A worker process reported a failure."""
