"""Per-class gain/error aggregation from disclosed data."""

from collections import Counter
from typing import Dict, Iterable, Sequence, Tuple

from ..errors import EmptyTestSetError
from ..models import BasisStats, ClassStats, SessionStats, SourceConfig
from ..photonics.signals import DetectionRecord
from .records import RawLog, SiftedKey


def accumulate_stats(alice: RawLog, bob: Sequence[DetectionRecord],
                     sifted: Tuple[SiftedKey, SiftedKey], disclosed: Iterable[int],
                     source: SourceConfig, basis_bias: float = 0.5) -> SessionStats:
    """Gains from the public click pattern, error rates from disclosed bits only.

    Args:
        alice: Alice's raw log
        bob: Bob's detection records
        sifted: Aligned (Alice, Bob) sifted keys
        disclosed: Slots whose sifted bits were revealed as test bits
        source: Source configuration (for per-class intensities)
        basis_bias: Probability of the X basis

    Raises:
        EmptyTestSetError: No sifted bit was disclosed
    """
    key_a, key_b = sifted
    disclosed_slots = set(int(s) for s in disclosed)
    position = {int(s): i for i, s in enumerate(key_a.slots)}
    tested_positions = sorted(position[s] for s in disclosed_slots if s in position)
    if not tested_positions:
        raise EmptyTestSetError("no sifted bits were disclosed for testing")

    sent = Counter(alice.class_ids)
    clicks: Counter = Counter()
    for record, class_id in zip(bob, alice.class_ids):
        if record.clicked:
            clicks[class_id] += 1
    sifted_per_class = Counter(key_a.class_ids)

    tested: Counter = Counter()
    errors: Counter = Counter()
    basis_stats: Dict[str, BasisStats] = {}
    basis_counts: Counter = Counter(b.value for b in key_a.bases if b is not None)
    basis_tested: Counter = Counter()
    basis_errors: Counter = Counter()
    for i in tested_positions:
        class_id = key_a.class_ids[i]
        mismatch = int(key_a.bits[i] != key_b.bits[i])
        tested[class_id] += 1
        errors[class_id] += mismatch
        basis = key_a.bases[i]
        if basis is not None:
            basis_tested[basis.value] += 1
            basis_errors[basis.value] += mismatch
    for basis_name, count in basis_counts.items():
        basis_stats[basis_name] = BasisStats(
            sifted=count, tested=basis_tested[basis_name], errors=basis_errors[basis_name]
        )

    classes = {}
    for class_id in sorted(sent):
        n_sent = sent[class_id]
        classes[class_id] = ClassStats(
            class_id=class_id,
            mu=source.mu(class_id),
            sent=n_sent,
            clicks=clicks[class_id],
            gain=clicks[class_id] / n_sent,
            sifted=sifted_per_class[class_id],
            tested=tested[class_id],
            errors=errors[class_id],
            error_rate=errors[class_id] / tested[class_id] if tested[class_id] else None,
        )
    signal = max(sorted(classes), key=lambda c: classes[c].mu)
    return SessionStats(
        protocol=alice.protocol,
        n_pulses=len(alice),
        basis_bias=basis_bias,
        classes=classes,
        sifted_length=len(key_a),
        by_basis=basis_stats,
        signal_class=signal,
    )
