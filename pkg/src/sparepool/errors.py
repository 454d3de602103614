"""Exception types shared across the package."""


class ParseError(ValueError):
    """A model or report document is structurally malformed."""


class ValidationError(ValueError):
    """An input violates a documented invariant."""


class SizeCapError(ValueError):
    """An input exceeds a documented size cap."""


class ReducibleChainError(ValueError):
    """A birth-death chain is not irreducible on the requested support."""


class LPError(RuntimeError):
    """The linear-program solver failed (infeasible, unbounded, or stalled)."""


class NonConvergenceError(RuntimeError):
    """An iterative solve hit its step cap before reaching the target.

    Carries the best achieved bracket so callers can report how close the
    run got.
    """

    def __init__(self, message: str, *, span: float | None = None,
                 gap: float | None = None) -> None:
        super().__init__(message)
        self.span = span
        self.gap = gap
