"""Exception hierarchy for the simulator.

Every error carries a stable ``code`` that ends up in CSV rows, delivery
reports and the CLI exit-code mapping.
"""

from typing import Any, Dict, Optional


class QKDSimError(Exception):
    """Base class for all simulator errors."""

    code: str = "ERROR"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        """Serialize the error for reports."""
        return {"code": self.code, "message": self.message, **self.details}


class ConfigurationError(QKDSimError, ValueError):
    """Invalid or inconsistent configuration."""

    code = "CONFIG"


class ProtocolMismatchError(ConfigurationError):
    """Protocol used with an incompatible signal or device model."""

    code = "PROTOCOL_MISMATCH"


class MalformedSignalError(QKDSimError, ValueError):
    """Signal does not have the shape a receiver expects."""

    code = "MALFORMED_SIGNAL"


class MisalignedLogsError(QKDSimError):
    """Alice's and Bob's per-slot logs do not line up."""

    code = "MISALIGNED_LOGS"


class EmptyTestSetError(QKDSimError):
    """No test bits were disclosed although a test fraction was requested."""

    code = "EMPTY_TEST_SET"


class BoundUnavailableError(QKDSimError):
    """Decoy statistics are insufficient for a bound."""

    code = "BOUND_UNAVAILABLE"


class DegenerateBoundError(BoundUnavailableError):
    """Decoy intensities coincide, so the linear system has no solution."""

    code = "DEGENERATE_BOUND"


class MissingBoundsError(QKDSimError):
    """DECOY key-rate mode was requested without decoy bounds."""

    code = "MISSING_BOUNDS"


class SessionAbort(QKDSimError):
    """The session was aborted; no key material may be emitted."""

    code = "ABORT"


class ReconcileFailure(SessionAbort):
    """Cascade verification still failed after the maximum number of passes."""

    code = "RECONCILE_FAIL"


class SyncFatal(SessionAbort):
    """Synchronization could not be recovered."""

    code = "FATAL"


class AuthPoolExhausted(SessionAbort):
    """The authentication key pool cannot pay for another tag."""

    code = "POOL_EXHAUSTED"


class AuthenticationError(QKDSimError):
    """A Wegman-Carter tag failed to verify."""

    code = "AUTH_FAIL"


class NoPathError(QKDSimError):
    """No route exists between two nodes."""

    code = "NO_PATH"


class NoKeyError(QKDSimError):
    """A route exists but some link store cannot pay for the transport."""

    code = "NO_KEY"


class ReservationError(QKDSimError):
    """Key store reservation contract violated."""

    code = "RESERVATION"


class SyncContractError(QKDSimError):
    """Illegal synchronization state transition."""

    code = "SYNC_CONTRACT"


class DegenerateStateError(QKDSimError, ValueError):
    """LFSR seeded with the all-zero state."""

    code = "DEGENERATE_STATE"


class KeystreamExhausted(QKDSimError):
    """More keystream requested than the LFSR period provides."""

    code = "KEYSTREAM_EXHAUSTED"


class KeyFileError(QKDSimError):
    """Key-material file is truncated or has a bad header."""

    code = "KEY_FILE"
