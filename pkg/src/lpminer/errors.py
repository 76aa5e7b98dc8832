"""Exception hierarchy.

Every error carries the name of the module that raised it so the CLI can
report where a run failed.
"""

from __future__ import annotations


class LPMError(Exception):
    module = "lpminer"


class LogFormatError(LPMError, ValueError):
    """Malformed or invalid event log input."""

    module = "event_log"

    def __init__(self, message: str, *, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class PetriNetError(LPMError, ValueError):
    module = "petri"


class BudgetExceeded(LPMError, RuntimeError):
    """A bounded state-space search ran out of budget.

    This means "undecided"; callers must not read it as a negative answer.
    """

    module = "petri"

    def __init__(self, message: str, *, visited: int):
        self.visited = visited
        super().__init__(f"{message} (visited {visited} states)")


class SegmentationError(LPMError, ValueError):
    module = "segmentation"


class ConfigError(LPMError, ValueError):
    """Invalid configuration. Defaults to the utility module; column
    mappings and run configs name their own module."""

    module = "utility"

    def __init__(self, message: str, *, module: str | None = None):
        if module is not None:
            self.module = module
        super().__init__(message)


class DiscoveryError(LPMError, ValueError):
    module = "discovery"
