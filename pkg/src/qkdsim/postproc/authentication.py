"""Wegman-Carter authentication over GF(2^64) and the authenticated classical channel."""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..errors import AuthenticationError, AuthPoolExhausted
from ..models import Party

logger = structlog.get_logger(__name__)

MAC_BITS = 64
TAG_COST_BITS = 2 * MAC_BITS
# x^64 + x^4 + x^3 + x + 1
_REDUCTION = (1 << 64) | 0b11011
_MASK64 = (1 << 64) - 1


def gf64_mul(a: int, b: int) -> int:
    """Product in GF(2^64) modulo x^64 + x^4 + x^3 + x + 1."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a >> 64:
            a ^= _REDUCTION
    return result


def _blocks(message: bytes) -> List[int]:
    padded = message + b"\x00" * (-len(message) % 8)
    blocks = [int.from_bytes(padded[i:i + 8], "big") for i in range(0, len(padded), 8)]
    blocks.append(len(message) & _MASK64)
    return blocks


def poly_hash(message: bytes, point: int) -> int:
    """Evaluate the message polynomial (with a trailing length block) at ``point``."""
    acc = 0
    for block in _blocks(message):
        acc = gf64_mul(acc ^ block, point)
    return acc


def forgery_bound(message_len: int) -> float:
    """Substitution probability bound: message blocks (with the length block) over 2^64."""
    return (-(-message_len // 8) + 1) / 2.0 ** MAC_BITS


def _bits_to_int(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits).tobytes(), "big")


class AuthKeyPool:
    """Secret bits reserved for authentication; consumed front to back, never reused."""

    def __init__(self, bits: np.ndarray):
        self._bits = np.asarray(bits, dtype=np.uint8).copy()
        self._position = 0
        self.consumed = 0
        self.tags_issued = 0
        self.refilled = 0

    @classmethod
    def from_rng(cls, n_bits: int, rng: np.random.Generator) -> "AuthKeyPool":
        """Pool filled with a bootstrap secret drawn from ``rng``."""
        return cls(rng.integers(0, 2, size=n_bits, dtype=np.uint8))

    def copy(self) -> "AuthKeyPool":
        """Independent copy for the other party (identical remaining bits)."""
        return AuthKeyPool(self._bits[self._position:])

    @property
    def remaining(self) -> int:
        return len(self._bits) - self._position

    def remaining_bits(self) -> np.ndarray:
        """Unspent secret, oldest first."""
        return self._bits[self._position:].copy()

    def can_afford(self, n_tags: int) -> bool:
        return self.remaining >= n_tags * TAG_COST_BITS

    def take(self, n_bits: int) -> np.ndarray:
        """Consume ``n_bits`` from the front of the pool.

        Raises:
            AuthPoolExhausted: Fewer than ``n_bits`` remain
        """
        if n_bits > self.remaining:
            raise AuthPoolExhausted(
                f"authentication pool holds {self.remaining} bits, {n_bits} needed",
                details={"remaining": self.remaining, "needed": n_bits},
            )
        start = self._position
        chunk = self._bits[start:start + n_bits].copy()
        self._bits[start:start + n_bits] = 0
        self._position += n_bits
        self.consumed += n_bits
        return chunk

    def refill(self, bits: np.ndarray) -> None:
        """Append fresh secret bits (key growing)."""
        fresh = np.asarray(bits, dtype=np.uint8)
        self._bits = np.concatenate([self._bits[self._position:], fresh])
        self._position = 0
        self.refilled += len(fresh)


def _one_time_key(pool: AuthKeyPool) -> Tuple[int, int]:
    key = pool.take(TAG_COST_BITS)
    return _bits_to_int(key[:MAC_BITS]), _bits_to_int(key[MAC_BITS:])


def wc_tag(message: bytes, pool: AuthKeyPool) -> bytes:
    """64-bit Wegman-Carter tag: polynomial hash at a secret point, masked by a one-time pad.

    Consumes 128 bits of the pool whatever the message length.

    Raises:
        AuthPoolExhausted: Pool holds fewer than 128 bits
    """
    point, mask = _one_time_key(pool)
    pool.tags_issued += 1
    return (poly_hash(message, point) ^ mask).to_bytes(8, "big")


def wc_verify(message: bytes, tag: bytes, pool: AuthKeyPool) -> bool:
    """Recompute the tag from the receiver's copy of the pool and compare.

    Raises:
        AuthPoolExhausted: Pool holds fewer than 128 bits
    """
    point, mask = _one_time_key(pool)
    expected = (poly_hash(message, point) ^ mask).to_bytes(8, "big")
    return expected == tag


@dataclass
class ClassicalMessage:
    """One public message on the classical channel."""

    sender: Party
    phase: str
    payload: bytes
    disclosed_bits: int = 0

    def encode(self) -> bytes:
        return self.sender.value.encode() + b"|" + self.phase.encode() + b"|" + self.payload


@dataclass
class PhaseSeal:
    """Tag closing one protocol phase."""

    phase: str
    tag: bytes
    transcript_bytes: int
    forgery_bound: float


@dataclass
class AuthenticatedChannel:
    """Public channel whose phases are closed with Wegman-Carter tags.

    Alice tags every phase transcript from her pool; Bob verifies what he
    received with his identical copy. ``tamper`` models an active adversary
    rewriting payloads in flight.
    """

    alice_pool: AuthKeyPool
    bob_pool: AuthKeyPool
    tamper: Optional[Callable[[ClassicalMessage], bytes]] = None
    sent: List[ClassicalMessage] = field(default_factory=list)
    received: List[ClassicalMessage] = field(default_factory=list)
    seals: List[PhaseSeal] = field(default_factory=list)
    disclosed_by_phase: Dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_secret(cls, bits: np.ndarray) -> "AuthenticatedChannel":
        """Channel whose two pools start from the same shared secret."""
        alice = AuthKeyPool(bits)
        return cls(alice_pool=alice, bob_pool=alice.copy())

    @property
    def disclosed_bits(self) -> int:
        """Key-dependent bits revealed so far."""
        return sum(self.disclosed_by_phase.values())

    def require(self, n_phases: int) -> None:
        """Fail before anything is disclosed if ``n_phases`` seals cannot be paid.

        Raises:
            AuthPoolExhausted: Pool too small
        """
        needed = n_phases * TAG_COST_BITS
        if self.alice_pool.remaining < needed or self.bob_pool.remaining < needed:
            raise AuthPoolExhausted(
                f"authenticating {n_phases} phases needs {needed} bits",
                details={"remaining": min(self.alice_pool.remaining, self.bob_pool.remaining),
                         "needed": needed},
            )

    def send(self, sender: Party, phase: str, payload: bytes, disclosed_bits: int = 0) -> bytes:
        """Record a message and return the payload as delivered."""
        message = ClassicalMessage(sender, phase, payload, disclosed_bits)
        self.sent.append(message)
        delivered = payload if self.tamper is None else self.tamper(message)
        self.received.append(ClassicalMessage(sender, phase, delivered, disclosed_bits))
        self.disclosed_by_phase[phase] = self.disclosed_by_phase.get(phase, 0) + disclosed_bits
        return delivered

    def _transcript(self, messages: List[ClassicalMessage], phase: str) -> bytes:
        return b"\n".join(m.encode() for m in messages if m.phase == phase)

    def seal(self, phase: str) -> PhaseSeal:
        """Tag the phase transcript and verify it on the receiving side.

        Raises:
            AuthenticationError: Received transcript does not match the tag
            AuthPoolExhausted: Pool cannot pay for the tag
        """
        sent = self._transcript(self.sent, phase)
        tag = wc_tag(sent, self.alice_pool)
        if not wc_verify(self._transcript(self.received, phase), tag, self.bob_pool):
            logger.warning("auth_fail", phase=phase, transcript_bytes=len(sent))
            raise AuthenticationError(f"tag mismatch on phase {phase!r}", details={"phase": phase})
        seal = PhaseSeal(phase=phase, tag=tag, transcript_bytes=len(sent),
                         forgery_bound=forgery_bound(len(sent)))
        self.seals.append(seal)
        return seal

    def refill(self, alice_bits: np.ndarray, bob_bits: np.ndarray) -> None:
        """Top both pools up from freshly distilled key."""
        self.alice_pool.refill(alice_bits)
        self.bob_pool.refill(bob_bits)
