"""Exception taxonomy shared by the whole package.

The CLI and service map these onto exit codes / HTTP statuses:
precondition failures -> exit 2 / HTTP 422, construction failures -> exit 3 / HTTP 409.
"""


class DegdivError(Exception):
    """Base class for all package errors."""


class PreconditionError(DegdivError, ValueError):
    """An operation was called with inputs that violate its stated contract."""


class SizeLimitError(PreconditionError):
    """An exact oracle was asked to exceed its practical size guard."""

    def __init__(self, what: str, requested: int, limit: int):
        self.what = what
        self.requested = requested
        self.limit = limit
        super().__init__(f"{what}: size {requested} exceeds the configured limit {limit}")


class ConstructionError(DegdivError, RuntimeError):
    """A randomized or heuristic construction could not certify its output."""


class RetriesExhaustedError(ConstructionError):
    """All attempts of a retrying construction failed their events.

    Carries the per-attempt event log so callers can distinguish bad luck
    from systematically impossible parameters.
    """

    def __init__(self, message: str, event_log):
        self.event_log = event_log
        super().__init__(message)
