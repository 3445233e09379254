"""Frame-synchronization state machine."""

from dataclasses import dataclass, replace
from typing import Callable, Dict, FrozenSet, Optional, Tuple

import structlog

from ..errors import SyncContractError
from ..models import QberClass, SyncStatus
from .resync import ResyncResult

logger = structlog.get_logger(__name__)

LEGAL_TRANSITIONS: Dict[SyncStatus, FrozenSet[SyncStatus]] = {
    SyncStatus.ALIGNED: frozenset({SyncStatus.ALIGNED, SyncStatus.BIT_DRIFT, SyncStatus.FRAME_LOST}),
    SyncStatus.BIT_DRIFT: frozenset({SyncStatus.BIT_DRIFT, SyncStatus.ALIGNED, SyncStatus.FRAME_LOST}),
    SyncStatus.FRAME_LOST: frozenset({SyncStatus.ALIGNED, SyncStatus.FATAL}),
    SyncStatus.FATAL: frozenset({SyncStatus.FATAL}),
}


@dataclass(frozen=True)
class Transition:
    """One entry of the transition log."""

    step: int
    before: SyncStatus
    after: SyncStatus
    classification: QberClass
    offset: int
    qber: Optional[float] = None

    def flat_record(self) -> Dict[str, object]:
        return {
            "step": self.step,
            "from": self.before.value,
            "to": self.after.value,
            "classification": self.classification.value,
            "offset": self.offset,
            "qber": "" if self.qber is None else self.qber,
        }


@dataclass(frozen=True)
class SyncState:
    """Synchronization status, current frame offset and the transition log."""

    status: SyncStatus = SyncStatus.ALIGNED
    offset: int = 0
    step: int = 0
    log: Tuple[Transition, ...] = ()

    @property
    def fatal(self) -> bool:
        return self.status is SyncStatus.FATAL


def _move(state: SyncState, after: SyncStatus, classification: QberClass,
          offset: Optional[int] = None, qber: Optional[float] = None) -> SyncState:
    if after not in LEGAL_TRANSITIONS[state.status]:
        raise SyncContractError(
            f"illegal transition {state.status.value} -> {after.value}",
            details={"from": state.status.value, "to": after.value},
        )
    new_offset = state.offset if offset is None else offset
    entry = Transition(step=state.step, before=state.status, after=after,
                       classification=classification, offset=new_offset, qber=qber)
    if after is not state.status:
        logger.info("sync_transition", before=state.status.value, after=after.value,
                    classification=classification.value, offset=new_offset)
    return replace(state, status=after, offset=new_offset, log=state.log + (entry,))


def sync_step(state: SyncState, classification: QberClass,
              resync: Optional[ResyncResult] = None,
              recalibrate: Optional[Callable[[], None]] = None,
              on_fatal: Optional[Callable[[], None]] = None) -> SyncState:
    """Advance the state machine by one classified window.

    RAPID_LOSS enters FRAME_LOST, which needs a resync result to resolve:
    success realigns with the found offset, failure is FATAL. SLOW_DEGRADE
    passes through BIT_DRIFT, runs ``recalibrate`` and returns to ALIGNED.
    FATAL is absorbing; ``on_fatal`` runs once on entry.

    Raises:
        SyncContractError: A resync result outside FRAME_LOST handling, or
            FRAME_LOST left without one
    """
    if state.fatal:
        return state
    nxt = replace(state, step=state.step + 1)

    if classification is QberClass.RAPID_LOSS or state.status is SyncStatus.FRAME_LOST:
        if state.status is not SyncStatus.FRAME_LOST:
            nxt = _move(nxt, SyncStatus.FRAME_LOST, classification)
        if resync is None:
            return nxt
        if resync.success:
            return _move(nxt, SyncStatus.ALIGNED, classification, offset=resync.offset,
                         qber=resync.qber)
        nxt = _move(nxt, SyncStatus.FATAL, classification, qber=resync.qber)
        logger.warning("sync_fatal", step=nxt.step, best_qber=resync.qber,
                       threshold=resync.threshold)
        if on_fatal is not None:
            on_fatal()
        return nxt

    if resync is not None:
        raise SyncContractError("resync result supplied without a frame loss")

    if classification is QberClass.SLOW_DEGRADE:
        nxt = _move(nxt, SyncStatus.BIT_DRIFT, classification)
        if recalibrate is not None:
            recalibrate()
        return _move(nxt, SyncStatus.ALIGNED, classification)

    return _move(nxt, SyncStatus.ALIGNED, classification)
