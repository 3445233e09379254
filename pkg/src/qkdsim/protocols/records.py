"""Per-slot transmission logs and sifted keys."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import ConfigurationError
from ..models import Basis, Party, Protocol


@dataclass
class RawLog:
    """Alice's private per-slot record of what she sent.

    ``bases`` holds the BB84 preparation basis (or the basis of the sent
    SARG04 state); ``pair_ids`` the SARG04 pair; ``phases`` the DPS phase of
    every emitted pulse (one more than the number of slots).
    """

    protocol: Protocol
    bits: np.ndarray
    class_ids: List[str]
    bases: List[Optional[Basis]] = field(default_factory=list)
    pair_ids: Optional[np.ndarray] = None
    phases: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if len(self.class_ids) != len(self.bits):
            raise ConfigurationError("class_ids and bits must have equal length")
        if not self.bases:
            self.bases = [None] * len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def window(self, start: int, stop: int) -> "RawLog":
        """Slots [start, stop) as a log of their own."""
        return RawLog(
            protocol=self.protocol,
            bits=self.bits[start:stop],
            class_ids=self.class_ids[start:stop],
            bases=self.bases[start:stop],
            pair_ids=None if self.pair_ids is None else self.pair_ids[start:stop],
            phases=None if self.phases is None else self.phases[start:stop + 1],
        )

    @classmethod
    def concatenate(cls, logs: List["RawLog"]) -> "RawLog":
        """Join consecutive windows of one session."""
        first = logs[0]
        phases = None
        if first.phases is not None:
            phases = np.concatenate([log.phases[:-1] for log in logs[:-1]] + [logs[-1].phases])
        return cls(
            protocol=first.protocol,
            bits=np.concatenate([log.bits for log in logs]),
            class_ids=[c for log in logs for c in log.class_ids],
            bases=[b for log in logs for b in log.bases],
            pair_ids=None if first.pair_ids is None
            else np.concatenate([log.pair_ids for log in logs]),
            phases=phases,
        )


@dataclass
class SiftedKey:
    """Sifted bit string together with the slots it came from."""

    bits: np.ndarray
    slots: np.ndarray
    owner: Party
    class_ids: List[str] = field(default_factory=list)
    bases: List[Optional[Basis]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        self.slots = np.asarray(self.slots, dtype=np.int64)
        if len(self.bits) != len(self.slots):
            raise ConfigurationError("|bits| must equal |slots|")
        if len(self.slots) > 1 and not np.all(np.diff(self.slots) > 0):
            raise ConfigurationError("slots must be strictly increasing")
        if not self.class_ids:
            self.class_ids = [""] * len(self.bits)
        if not self.bases:
            self.bases = [None] * len(self.bits)

    def __len__(self) -> int:
        return len(self.bits)

    def subset(self, mask: np.ndarray) -> "SiftedKey":
        """Positions selected by a boolean mask, order preserved."""
        idx = np.flatnonzero(mask)
        return SiftedKey(
            bits=self.bits[idx],
            slots=self.slots[idx],
            owner=self.owner,
            class_ids=[self.class_ids[i] for i in idx],
            bases=[self.bases[i] for i in idx],
        )

    def zeroize(self) -> None:
        """Overwrite key material in place."""
        self.bits[:] = 0


@dataclass
class Announcements:
    """Public classical messages exchanged during sifting."""

    bob_bases: List[Optional[Basis]]
    alice_bases: List[Optional[Basis]]
    alice_pairs: Optional[np.ndarray] = None
    bob_conclusive: Optional[np.ndarray] = None
