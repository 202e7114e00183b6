"""Exception types shared across the package."""


class UsageValuesError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(UsageValuesError):
    """Invalid run configuration (bad field, missing file, schema mismatch)."""


class ScenarioFormatError(UsageValuesError):
    """Scenario or chronicle data violates the CSV schema or its invariants."""


class GuardExceeded(UsageValuesError):
    """An enumeration oracle was asked for more work than its guard allows."""


class SolverFailure(UsageValuesError):
    """Numerical failure inside a weekly solve, annotated with context."""
