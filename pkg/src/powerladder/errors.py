"""Exception hierarchy shared by every module.

The CLI maps each family onto a distinct exit code, so new errors should
subclass one of the three families rather than ``PowerLadderError``.
"""


class PowerLadderError(Exception):
    """Base class for all package errors."""


class ConfigError(PowerLadderError, ValueError):
    """Invalid or unreadable scenario configuration."""


class DataError(PowerLadderError, ValueError):
    """Invalid technology or resource data."""


class SimulationError(PowerLadderError, RuntimeError):
    """A run could not be completed.

    ``partial`` optionally carries the output accumulated before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ResourceExhaustedError(SimulationError):
    def __init__(self, resource, requested, potential, partial=None):
        super().__init__(
            f"resource exhausted: {resource!r} needs {requested:.6g} "
            f"but technical potential is {potential:.6g}",
            partial,
        )
        self.resource = resource
        self.requested = requested
        self.potential = potential


class StepSizeError(SimulationError):
    pass
