"""Sifting: public announcements and the per-protocol keep rules."""

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import MisalignedLogsError, ProtocolMismatchError
from ..models import Party, Protocol
from ..photonics.signals import DetectionRecord
from .encoders import sarg04_decode
from .records import Announcements, RawLog, SiftedKey


def _check_aligned(alice: RawLog, bob: Sequence[DetectionRecord]) -> None:
    if len(alice) != len(bob):
        raise MisalignedLogsError(
            f"Alice logged {len(alice)} slots, Bob {len(bob)}",
            details={"alice": len(alice), "bob": len(bob)},
        )
    for k, record in enumerate(bob):
        if record.slot != k:
            raise MisalignedLogsError(f"Bob record {k} carries slot {record.slot}")


def announce(protocol: Protocol, alice: RawLog, bob: Sequence[DetectionRecord]) -> Announcements:
    """Messages both sides broadcast: bases, SARG04 pairs, Bob's conclusive slots."""
    _check_aligned(alice, bob)
    announcements = Announcements(
        bob_bases=[r.basis_used for r in bob],
        alice_bases=list(alice.bases) if protocol in (Protocol.BB84, Protocol.BB84_DECOY)
        else [None] * len(alice),
    )
    if protocol is Protocol.SARG04:
        assert alice.pair_ids is not None
        announcements.alice_pairs = alice.pair_ids
        announcements.bob_conclusive = np.array(
            [sarg04_decode(int(p), r.basis_used, r.outcome) is not None
             for p, r in zip(alice.pair_ids, bob)],
            dtype=bool,
        )
    elif protocol is Protocol.B92:
        announcements.bob_conclusive = np.array(
            [r.clicked and bool(r.monitor_ok) for r in bob], dtype=bool
        )
    elif protocol is Protocol.DPS:
        announcements.bob_conclusive = np.array(
            [r.clicked and not r.double_click for r in bob], dtype=bool
        )
    return announcements


def sift(protocol: Protocol, alice: RawLog, bob: Sequence[DetectionRecord],
         announcements: Optional[Announcements] = None) -> Tuple[SiftedKey, SiftedKey]:
    """Apply the protocol's keep rule and return aligned sifted keys.

    Raises:
        MisalignedLogsError: Logs differ in length or slot numbering
        ProtocolMismatchError: Log was produced by another protocol
    """
    if alice.protocol is not protocol:
        raise ProtocolMismatchError(
            f"log produced by {alice.protocol.value}, sifting as {protocol.value}"
        )
    _check_aligned(alice, bob)
    ann = announcements or announce(protocol, alice, bob)

    keep: List[int] = []
    bob_bits: List[int] = []
    if protocol in (Protocol.BB84, Protocol.BB84_DECOY):
        for k, record in enumerate(bob):
            if record.clicked and ann.alice_bases[k] is ann.bob_bases[k]:
                keep.append(k)
                bob_bits.append(record.bit)  # type: ignore[arg-type]
    elif protocol is Protocol.SARG04:
        assert ann.alice_pairs is not None
        for k, record in enumerate(bob):
            bit = sarg04_decode(int(ann.alice_pairs[k]), record.basis_used, record.outcome)
            if bit is not None:
                keep.append(k)
                bob_bits.append(bit)
    else:
        assert ann.bob_conclusive is not None
        for k in np.flatnonzero(ann.bob_conclusive):
            keep.append(int(k))
            bob_bits.append(bob[k].bit)  # type: ignore[arg-type]

    slots = np.array(keep, dtype=np.int64)
    class_ids = [alice.class_ids[k] for k in keep]
    bases = [alice.bases[k] for k in keep]
    alice_key = SiftedKey(bits=alice.bits[slots] if keep else np.zeros(0, dtype=np.uint8),
                          slots=slots, owner=Party.ALICE, class_ids=class_ids, bases=bases)
    bob_key = SiftedKey(bits=np.array(bob_bits, dtype=np.uint8), slots=slots.copy(),
                        owner=Party.BOB, class_ids=list(class_ids), bases=list(bases))
    return alice_key, bob_key
