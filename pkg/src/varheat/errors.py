"""Exception hierarchy shared by all varheat modules."""
from typing import Any, Dict, Optional


class VarheatError(Exception):
    """Base class for every error raised by varheat."""


class InvalidArgumentError(VarheatError, ValueError):
    """A precondition of an operation does not hold."""


class DegenerateInputError(InvalidArgumentError):
    """Input is admissible in type but carries no information (zero sums, constant paths)."""


class NumericalFailureError(VarheatError, ArithmeticError):
    """A numerical procedure did not reach its tolerance."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v}" for k, v in self.diagnostics.items())
        return f"{base} ({details})"


class EstimatorUndefinedError(NumericalFailureError):
    """The log-ratio statistic A_N is not above one."""


class ReplicateFailure(VarheatError):
    """A Monte Carlo replicate raised; carries what is needed to reproduce it."""

    def __init__(self, replicate_index: int, seed: int, cause: BaseException):
        super().__init__(f"replicate {replicate_index} (seed={seed}) failed: {cause}")
        self.replicate_index = replicate_index
        self.seed = seed
        self.cause = cause
