"""Exception types shared across the package."""


class LiactError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(LiactError):
    """Operands live in spaces of incompatible dimension."""


class ParityError(LiactError):
    """An even quantity was required and an odd (or mixed) one was given."""


class ExprSyntaxError(LiactError):
    """Source text failed to parse; `offset` is the byte position."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class LogChartError(LiactError):
    """Group element lies outside the principal logarithm chart."""


class ChartDomainError(LiactError):
    """Point lies outside the chart's coordinate box."""


class EscapeError(LiactError):
    """A flow left the chart (or blew up) before the requested time.

    Carries whatever was integrated up to the escape so callers can
    inspect the partial result.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ScenarioError(LiactError):
    """Scenario file failed schema validation or cross-reference checks."""
