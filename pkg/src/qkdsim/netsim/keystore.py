"""Per-link key stores with reserve/commit/rollback semantics."""

import threading
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..errors import NoKeyError, ReservationError

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class AuditEntry:
    """One ledger movement of a key store."""

    kind: str
    n_bits: int
    start: int
    ref: str = ""


@dataclass(frozen=True)
class Reservation:
    """Contiguous range [start, start + otp_bits + auth_bits) held for one transport."""

    link_id: str
    owner: str
    start: int
    otp_bits: int
    auth_bits: int
    ref: str = ""

    @property
    def stop(self) -> int:
        return self.start + self.otp_bits + self.auth_bits


class KeyStore:
    """Distilled key material of one link as held by one of its end nodes.

    Bits are consumed strictly in order. A single reservation may be
    outstanding at a time; it is released exactly once, by commit (bits
    consumed and zeroized) or rollback (nothing changes).
    """

    def __init__(self, link_id: str, owner: str):
        self.link_id = link_id
        self.owner = owner
        # _buffer holds bits from absolute position _head on
        self._buffer = bytearray()
        self._head = 0
        self._lock = threading.Lock()
        self._reservation: Optional[Reservation] = None
        self.produced = 0
        self.consumed_otp = 0
        self.consumed_auth = 0
        self.audit: List[AuditEntry] = []
        self.consumed_ranges: List[Tuple[int, int]] = []

    @property
    def available(self) -> int:
        """produced - consumed_otp - consumed_auth."""
        return self.produced - self.consumed_otp - self.consumed_auth

    @property
    def reserved(self) -> int:
        r = self._reservation
        return 0 if r is None else r.otp_bits + r.auth_bits

    @property
    def free(self) -> int:
        """Bits a new reservation could claim."""
        return self.available - self.reserved

    def deposit(self, bits: np.ndarray, ref: str = "") -> int:
        """Append freshly distilled bits; returns the number deposited."""
        chunk = np.asarray(bits, dtype=np.uint8)
        with self._lock:
            start = self._head + len(self._buffer)
            self._buffer.extend(chunk.tobytes())
            self.produced += len(chunk)
            self.audit.append(AuditEntry("produced", len(chunk), start, ref))
        return len(chunk)

    def reserve(self, otp_bits: int, auth_bits: int = 0, ref: str = "") -> Reservation:
        """Claim the next ``otp_bits + auth_bits`` bits.

        Raises:
            ReservationError: Another reservation is outstanding
            NoKeyError: Not enough key
        """
        with self._lock:
            if self._reservation is not None:
                raise ReservationError(
                    f"store {self.link_id}@{self.owner} already has an outstanding reservation"
                )
            needed = otp_bits + auth_bits
            if needed > self.available:
                raise NoKeyError(
                    f"link {self.link_id} has {self.available} bits at {self.owner}, needs {needed}",
                    details={"link": self.link_id, "available": self.available, "needed": needed},
                )
            self._reservation = Reservation(self.link_id, self.owner, self._head, otp_bits,
                                            auth_bits, ref)
            return self._reservation

    def _check(self, reservation: Reservation) -> None:
        if self._reservation is None or reservation != self._reservation:
            raise ReservationError(f"reservation on {self.link_id}@{self.owner} is not outstanding")

    def read(self, reservation: Reservation) -> Tuple[np.ndarray, np.ndarray]:
        """(OTP bits, authentication bits) of an outstanding reservation."""
        with self._lock:
            self._check(reservation)
            lo, hi = reservation.start - self._head, reservation.stop - self._head
            view = np.frombuffer(bytes(self._buffer[lo:hi]), dtype=np.uint8)
        return view[:reservation.otp_bits].copy(), view[reservation.otp_bits:].copy()

    def commit(self, reservation: Reservation) -> None:
        """Consume, zeroize and drop the reserved bits."""
        with self._lock:
            self._check(reservation)
            consumed = reservation.stop - self._head
            self._buffer[:consumed] = bytes(consumed)
            del self._buffer[:consumed]
            self._head = reservation.stop
            self.consumed_otp += reservation.otp_bits
            self.consumed_auth += reservation.auth_bits
            self.consumed_ranges.append((reservation.start, reservation.stop))
            if reservation.otp_bits:
                self.audit.append(AuditEntry("otp", reservation.otp_bits, reservation.start,
                                             reservation.ref))
            if reservation.auth_bits:
                self.audit.append(AuditEntry("auth", reservation.auth_bits,
                                             reservation.start + reservation.otp_bits,
                                             reservation.ref))
            self._reservation = None

    def rollback(self, reservation: Reservation) -> None:
        """Release a reservation without consuming anything."""
        with self._lock:
            self._check(reservation)
            self._reservation = None

    def snapshot(self) -> np.ndarray:
        """Copy of the unconsumed key bits, oldest first."""
        with self._lock:
            return np.frombuffer(bytes(self._buffer), dtype=np.uint8).copy()

    def ranges_disjoint(self) -> bool:
        """No bit was consumed twice."""
        spans = sorted(self.consumed_ranges)
        return all(a_stop <= b_start for (_, a_stop), (b_start, _) in zip(spans, spans[1:]))
