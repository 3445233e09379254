"""Frame resynchronization search and fault injectors."""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..models import Outcome, SyncConfig
from ..photonics.signals import DetectionRecord
from ..protocols.records import RawLog
from ..protocols.sifting import sift


def _empty(slot: int, template: Optional[DetectionRecord] = None) -> DetectionRecord:
    basis = None if template is None else template.basis_used
    return DetectionRecord(slot=slot, basis_used=basis, outcome=Outcome.NONE)


def realign(records: Sequence[DetectionRecord], shift: int, start: int,
            stop: int) -> List[DetectionRecord]:
    """Bob's records k + shift for k in [start, stop), renumbered from 0.

    Positions outside the recorded stream read as no-click slots.
    """
    out = []
    for k in range(start, stop):
        source = k + shift
        if 0 <= source < len(records):
            out.append(replace(records[source], slot=k - start))
        else:
            out.append(_empty(k - start))
    return out


def paired_qber(alice: RawLog, records: Sequence[DetectionRecord], shift: int,
                start: int = 0, stop: Optional[int] = None) -> Optional[float]:
    """Sifted QBER of slots [start, stop) when Bob's stream is read ``shift`` slots later.

    Returns None when nothing survives sifting.
    """
    stop = len(alice) if stop is None else min(stop, len(alice))
    window = alice.window(start, stop)
    key_a, key_b = sift(alice.protocol, window, realign(records, shift, start, stop))
    if len(key_a) == 0:
        return None
    return float(np.mean(key_a.bits != key_b.bits))


@dataclass
class ResyncResult:
    """Outcome of a shift scan; ``offset`` is None on FAIL."""

    offset: Optional[int]
    qber: float
    threshold: float
    scan: Dict[int, float] = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.offset is not None


def frame_resync(alice: RawLog, bob: Sequence[DetectionRecord], search_range: int,
                 cfg: Optional[SyncConfig] = None, start: int = 0,
                 stop: Optional[int] = None) -> ResyncResult:
    """Scan shifts in [-search_range, search_range] for the one minimising the QBER.

    The minimum is accepted when it does not exceed ``recover_factor`` times
    the baseline QBER; ties go to the smallest absolute shift.
    """
    cfg = cfg or SyncConfig()
    threshold = cfg.recover_factor * cfg.baseline_qber
    scan: Dict[int, float] = {}
    for shift in sorted(range(-search_range, search_range + 1), key=lambda s: (abs(s), s)):
        qber = paired_qber(alice, bob, shift, start, stop)
        if qber is not None:
            scan[shift] = qber
    if not scan:
        return ResyncResult(offset=None, qber=0.5, threshold=threshold)
    best = min(scan, key=lambda s: (scan[s], abs(s), s))
    offset = best if scan[best] <= threshold else None
    return ResyncResult(offset=offset, qber=scan[best], threshold=threshold, scan=scan)


def inject_frame_offset(records: Sequence[DetectionRecord], offset: int,
                        onset: int = 0) -> List[DetectionRecord]:
    """Delay Bob's stream by ``offset`` slots from ``onset`` on (negative offsets advance it)."""
    out: List[DetectionRecord] = list(records[:onset])
    for k in range(onset, len(records)):
        source = k - offset
        if 0 <= source < len(records):
            out.append(replace(records[source], slot=k))
        else:
            out.append(_empty(k, records[k]))
    return out


def randomize_stream(records: Sequence[DetectionRecord], onset: int,
                     rng: np.random.Generator) -> List[DetectionRecord]:
    """Replace every outcome from ``onset`` on with a random click."""
    out: List[DetectionRecord] = list(records[:onset])
    bits = rng.integers(0, 2, size=max(0, len(records) - onset))
    for k, bit in zip(range(onset, len(records)), bits):
        outcome = Outcome.BIT1 if bit else Outcome.BIT0
        out.append(replace(records[k], outcome=outcome, double_click=False,
                           monitor_ok=True if records[k].monitor_ok is not None else None))
    return out
