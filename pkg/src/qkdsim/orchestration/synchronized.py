"""Window-by-window session driven through the frame-synchronization state machine."""

import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..attacks.base import Attack
from ..models import (
    ChannelModel,
    DetectorModel,
    FaultConfig,
    FaultKind,
    Outcome,
    Party,
    QberClass,
    SessionConfig,
    SyncConfig,
)
from ..photonics.signals import DetectionRecord
from ..protocols.records import RawLog, SiftedKey
from ..protocols.session import run_quantum_phase
from ..protocols.sifting import sift
from ..randomness import SessionStreams, derive_seed
from ..syncctl.drift import advance_channel
from ..syncctl.monitor import QberWindow, classify
from ..syncctl.resync import frame_resync, paired_qber, realign
from ..syncctl.state_machine import SyncState, Transition, sync_step

logger = structlog.get_logger(__name__)


@dataclass
class SyncSessionResult:
    """Outcome of a synchronized session.

    ``aligned_records`` holds Bob's records re-read at the offset in force
    for each window; ``keys`` is None when the session went FATAL.
    ``loss_qber`` keeps the window QBERs that triggered a frame resync.
    """

    state: SyncState
    alice: RawLog
    aligned_records: List[DetectionRecord]
    qber_series: List[float]
    keys: Optional[Tuple[SiftedKey, SiftedKey]]
    recalibrations: int = 0
    recovery_qber: List[float] = field(default_factory=list)
    loss_qber: List[float] = field(default_factory=list)

    @property
    def transitions(self) -> Tuple[Transition, ...]:
        return self.state.log

    @property
    def fatal(self) -> bool:
        return self.state.fatal


def _observe(raw: List[DetectionRecord], start: int, stop: int, fault: Optional[FaultConfig],
             rng: np.random.Generator) -> List[DetectionRecord]:
    """Bob's recorded stream for slots [start, stop) with the fault applied."""
    out = []
    for k in range(start, stop):
        if fault is None or k < fault.onset:
            out.append(raw[k])
        elif fault.kind is FaultKind.FRAME_OFFSET:
            source = k - fault.offset
            if 0 <= source < len(raw):
                out.append(replace(raw[source], slot=k))
            else:
                out.append(DetectionRecord(slot=k, basis_used=raw[k].basis_used,
                                           outcome=Outcome.NONE))
        else:
            outcome = Outcome.BIT1 if rng.random() < 0.5 else Outcome.BIT0
            out.append(replace(raw[k], outcome=outcome, double_click=False))
    return out


def _join(pairs: List[Tuple[SiftedKey, SiftedKey]]) -> Tuple[SiftedKey, SiftedKey]:
    joined = []
    for i, owner in enumerate((Party.ALICE, Party.BOB)):
        keys = [pair[i] for pair in pairs]
        joined.append(SiftedKey(
            bits=np.concatenate([k.bits for k in keys]) if keys else np.zeros(0, dtype=np.uint8),
            slots=np.concatenate([k.slots for k in keys]) if keys else np.zeros(0, dtype=np.int64),
            owner=owner,
            class_ids=[c for k in keys for c in k.class_ids],
            bases=[b for k in keys for b in k.bases],
        ))
    return joined[0], joined[1]


def run_synchronized_session(cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
                             sync_cfg: Optional[SyncConfig] = None,
                             fault: Optional[FaultConfig] = None,
                             attack: Optional[Attack] = None) -> SyncSessionResult:
    """Run the quantum phase window by window under QBER supervision.

    Each window is sifted at the offset currently in force and its QBER fed
    to :func:`classify`. Frame loss triggers a shift scan over the window;
    slow degradation recalibrates the alignment back to the channel's
    intrinsic misalignment. A FATAL transition zeroizes every sifted key
    produced so far and stops the session.
    """
    sync_cfg = sync_cfg or SyncConfig()
    streams = SessionStreams.from_seed(cfg.seed)
    fault_rng = np.random.default_rng(derive_seed(cfg.seed, 1))
    width = sync_cfg.window
    n_windows = math.ceil(cfg.n_pulses / width)

    logs: List[RawLog] = []
    raw: List[DetectionRecord] = []
    observed: List[DetectionRecord] = []
    aligned: List[DetectionRecord] = []
    in_flight: List[Tuple[SiftedKey, SiftedKey]] = []
    monitor = QberWindow(width)
    state = SyncState()
    anchor_channel, anchor_slot = channel, 0
    recalibrations = 0
    recovery: List[float] = []
    lost: List[float] = []
    recovered = False

    for w in range(n_windows):
        start = w * width
        stop = min(cfg.n_pulses, start + width)
        window_cfg = cfg.model_copy(update={"n_pulses": stop - start})
        window_channel = advance_channel(anchor_channel, start - anchor_slot)
        log, records = run_quantum_phase(window_cfg, window_channel, detector, attack, streams)
        logs.append(log)
        raw.extend(replace(r, slot=r.slot + start) for r in records)
        observed.extend(_observe(raw, start, stop, fault, fault_rng))
        alice = RawLog.concatenate(logs)

        qber = paired_qber(alice, observed, state.offset, start, stop)
        if qber is not None:
            monitor.append(qber)
        if len(monitor.series) >= 2 and qber is not None:
            classification = classify(monitor, sync_cfg)
            resync = None
            if classification is QberClass.RAPID_LOSS:
                resync = frame_resync(alice, observed, sync_cfg.search_range, sync_cfg, start, stop)

            def recalibrate() -> None:
                nonlocal anchor_channel, anchor_slot, recalibrations
                anchor_channel = advance_channel(anchor_channel, stop - anchor_slot).model_copy(
                    update={"misalignment_angle": channel.misalignment_angle})
                anchor_slot = stop
                recalibrations += 1

            def zeroize() -> None:
                for key_a, key_b in in_flight:
                    key_a.zeroize()
                    key_b.zeroize()

            state = sync_step(state, classification, resync, recalibrate=recalibrate,
                              on_fatal=zeroize)
            if state.fatal:
                break
            if resync is not None:
                lost.append(qber)
                monitor.series[-1] = resync.qber
                recovered = True
            elif recovered:
                recovery.append(qber)

        window_records = realign(observed, state.offset, start, stop)
        key_a, key_b = sift(cfg.protocol, alice.window(start, stop), window_records)
        key_a.slots += start
        key_b.slots += start
        in_flight.append((key_a, key_b))
        aligned.extend(replace(r, slot=r.slot + start) for r in window_records)

    alice = RawLog.concatenate(logs)
    keys = None if state.fatal else _join(in_flight)
    logger.info("synchronized_session_complete", windows=len(monitor.series),
                status=state.status.value, offset=state.offset, recalibrations=recalibrations)
    return SyncSessionResult(state=state, alice=alice, aligned_records=aligned,
                             qber_series=list(monitor.series), keys=keys,
                             recalibrations=recalibrations, recovery_qber=recovery,
                             loss_qber=lost)
