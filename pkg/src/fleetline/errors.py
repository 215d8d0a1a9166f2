"""Exception types shared across the package."""


class FleetlineError(Exception):
    """Base class for all domain errors."""


class InvalidParam(FleetlineError):
    """An argument violates a documented precondition."""


class InvalidLocation(InvalidParam):
    """Latitude or longitude outside the WGS-84 range."""


class OutOfRange(InvalidParam):
    """A scalar argument is outside its documented interval."""


class NonMonotonicTrack(FleetlineError):
    """Track timestamps or sequence numbers do not strictly increase."""


class CapacityError(FleetlineError):
    """Payload does not fit the requested QR symbol."""


class UncorrectableError(FleetlineError):
    """Reed-Solomon decoding failed: too many errors."""


class FormatError(FleetlineError):
    """A serialized structure (QR format info, envelope frame) is unreadable."""


class SegmentError(FleetlineError):
    """QR data segment is not a well-formed byte-mode segment."""


class AuthFailure(FleetlineError):
    """Wrong passphrase or tampered envelope; deliberately indistinguishable."""


class NoOverlap(FleetlineError):
    """Two customers share no co-rated vehicle."""


class ColdStart(FleetlineError):
    """A vehicle has no ratings to predict from."""


class EmptyFleet(FleetlineError):
    """No vehicle passes the recommendation filters."""


class InvalidState(FleetlineError):
    """Operation applied to an entity in the wrong lifecycle state."""


class IllegalTransition(FleetlineError):
    """Trip state machine received an event that is not legal from its state."""


class OverlapError(FleetlineError):
    """Schedule entries overlap in time."""

    def __init__(self, trip_a: str, trip_b: str):
        super().__init__(f"schedule overlap between {trip_a} and {trip_b}")
        self.trip_a = trip_a
        self.trip_b = trip_b


class CorruptLog(FleetlineError):
    """Event log has a framing error or sequence gap."""

    def __init__(self, seq: int, reason: str):
        super().__init__(f"corrupt event log at seq {seq}: {reason}")
        self.seq = seq
        self.reason = reason


class ValidationError(FleetlineError):
    """A scenario file failed structural or reference checks."""
