"""Post-announcement evaluation of what the adversary knows."""

from typing import Optional, Sequence

from ..models import Basis
from ..photonics.signals import BASIS_AXES
from .base import EveRecord


def eve_bit_accuracy(records: Sequence[EveRecord], alice_bits: Sequence[int],
                     alice_bases: Sequence[Optional[Basis]], multi_photon_only: bool = False) -> float:
    """Fraction of Alice's bits Eve recovers once bases are announced.

    Intercept-resend records are scored on slots where Eve happened to pick
    Alice's basis; PNS records measure the stored photons in the announced
    basis.
    """
    hits = total = 0
    for record in records:
        slot = record.slot
        basis = alice_bases[slot]
        if basis is None:
            continue
        if record.stored_photons and record.stored_bloch is not None:
            if multi_photon_only and record.photons < 2:
                continue
            projection = sum(r * a for r, a in zip(record.stored_bloch, BASIS_AXES[basis]))
            guess = 0 if projection > 0 else 1
        elif record.bit is not None and record.basis is basis and not multi_photon_only:
            guess = record.bit
        else:
            continue
        total += 1
        hits += int(guess == alice_bits[slot])
    return hits / total if total else 0.0
