"""Drift, QBER monitoring, frame resynchronization and the abort path."""

from .drift import advance_channel, apply_drift, drift_profile, drifted_parameters
from .monitor import QberWindow, classify, trend_fit
from .resync import (
    ResyncResult,
    frame_resync,
    inject_frame_offset,
    paired_qber,
    randomize_stream,
    realign,
)
from .state_machine import LEGAL_TRANSITIONS, SyncState, Transition, sync_step

__all__ = [
    "LEGAL_TRANSITIONS",
    "QberWindow",
    "ResyncResult",
    "SyncState",
    "Transition",
    "advance_channel",
    "apply_drift",
    "classify",
    "drift_profile",
    "drifted_parameters",
    "frame_resync",
    "inject_frame_offset",
    "paired_qber",
    "randomize_stream",
    "realign",
    "sync_step",
    "trend_fit",
]
