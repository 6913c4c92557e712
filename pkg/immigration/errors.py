"""Exception hierarchy shared by the simulation, diagnostics and CLI layers."""

from typing import Any, Optional, Sequence


class ImmigrationError(Exception):
    """Base class of every error raised on purpose by this package."""


class DomainError(ImmigrationError, ValueError):
    """An argument lies outside the domain of the operation.

    ``field`` optionally names the offending parameter.
    """

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class PreconditionError(ImmigrationError, ValueError):
    """A documented precondition of an operation does not hold."""


class UndefinedTestError(ImmigrationError, ValueError):
    """A test statistic cannot be computed for the given data."""


class ConfigError(ImmigrationError, ValueError):
    """Experiment configuration does not match the schema.

    ``field`` holds the dotted path of the offending entry.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message

    def __reduce__(self):
        return type(self), (self.field, self.message)


class NonAbsorbedPathError(ImmigrationError, RuntimeError):
    """A birth-death path exhausted its time or jump budget before hitting 0."""

    def __init__(self, message: str, partial_path: Any = None):
        super().__init__(message)
        self.partial_path = partial_path

    def __reduce__(self):
        return type(self), (self.args[0], self.partial_path)


class TruncationError(ImmigrationError, RuntimeError):
    """The stationary tail bound did not fall below ``tol`` before ``c_max``.

    Carries the best values obtained with the largest window tried.
    """

    def __init__(
        self,
        message: str,
        values: Optional[Sequence[float]] = None,
        bound: float = float("inf"),
        c_used: float = float("nan"),
        replicate: Optional[int] = None,
    ):
        super().__init__(message)
        self.values = values
        self.bound = bound
        self.c_used = c_used
        self.replicate = replicate

    def __reduce__(self):
        return type(self), (self.args[0], self.values, self.bound, self.c_used, self.replicate)

    def with_replicate(self, replicate: int) -> "TruncationError":
        err = TruncationError(
            f"replicate {replicate}: {self.args[0]}",
            values=self.values,
            bound=self.bound,
            c_used=self.c_used,
            replicate=replicate,
        )
        return err

    def to_json(self):
        return {
            "message": str(self),
            "replicate": self.replicate,
            "bound": self.bound,
            "c_used": self.c_used,
            "values": None if self.values is None else [float(v) for v in self.values],
        }
