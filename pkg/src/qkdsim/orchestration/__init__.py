"""Session drivers tying the quantum, post-processing and sync layers together."""

from .orchestrator import SESSION_PHASES, SessionOrchestrator, SessionResult, default_rate_mode
from .synchronized import SyncSessionResult, run_synchronized_session

__all__ = [
    "SESSION_PHASES",
    "SessionOrchestrator",
    "SessionResult",
    "SyncSessionResult",
    "default_rate_mode",
    "run_synchronized_session",
]
