"""Per-link circuit breaker for authentication failures."""

from typing import Dict, List

import structlog

logger = structlog.get_logger(__name__)


class LinkGuard:
    """Open a link after repeated authentication failures.

    A link whose breaker is open is skipped by path finding until
    :meth:`reset` is called.
    """

    def __init__(self, failure_threshold: int = 5):
        """Initialize the guard.

        Args:
            failure_threshold: Consecutive failures that open a link
        """
        self.failure_threshold = failure_threshold
        self.failure_count: Dict[str, int] = {}
        self.state: Dict[str, str] = {}

    def is_open(self, link_id: str) -> bool:
        return self.state.get(link_id, "closed") == "open"

    def open_links(self) -> List[str]:
        return sorted(k for k, v in self.state.items() if v == "open")

    def record_failure(self, link_id: str, error: Exception) -> Dict[str, object]:
        """Count a failure on ``link_id``."""
        count = self.failure_count.get(link_id, 0) + 1
        self.failure_count[link_id] = count
        if count >= self.failure_threshold and not self.is_open(link_id):
            self.state[link_id] = "open"
            logger.warning("link_guard_open", link=link_id, failures=count)
        return {
            "error": str(error),
            "circuit_state": self.state.get(link_id, "closed"),
            "failure_count": count,
        }

    def record_success(self, link_id: str) -> None:
        if not self.is_open(link_id):
            self.failure_count[link_id] = 0

    def reset(self, link_id: str) -> None:
        self.failure_count[link_id] = 0
        self.state[link_id] = "closed"
