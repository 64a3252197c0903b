"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """An enumeration or order cap was exceeded; the message names the cap."""


class EvalDomainError(ValueError):
    """A function was evaluated outside its real domain.

    Carries the function name and the offending value so callers can point
    at the exact subexpression that failed.
    """

    def __init__(self, fn: str, value, expr: str | None = None):
        self.fn = fn
        self.value = value
        self.expr = expr
        where = f" in '{expr}'" if expr else ""
        super().__init__(f"{fn}: argument {value!r} outside domain{where}")


class ExprSyntaxError(ValueError):
    """Malformed expression source; `offset` is the byte offset of the error."""

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} (at offset {offset})")


class EvaluationError(RuntimeError):
    """A numeric evaluation produced a non-finite sample; `x` locates it."""

    def __init__(self, message: str, x=None):
        self.x = x
        super().__init__(message if x is None else f"{message} at x={x!r}")


class SingularSystemError(RuntimeError):
    """The alternation linear system was singular for the given reference set."""

    def __init__(self, references):
        self.references = list(references)
        super().__init__(
            f"singular alternation system for reference set {self.references}"
        )
