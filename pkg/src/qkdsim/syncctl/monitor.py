"""Windowed QBER monitoring and fault classification."""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import SyncContractError
from ..models import QberClass, SyncConfig


@dataclass
class QberWindow:
    """QBER series of consecutive windows of ``length`` slots."""

    length: int
    series: List[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.length < 100:
            raise SyncContractError(f"QBER window must span at least 100 slots, got {self.length}")

    def append(self, qber: float) -> None:
        self.series.append(float(qber))

    @property
    def latest(self) -> Optional[float]:
        return self.series[-1] if self.series else None

    def tail(self, n: int) -> np.ndarray:
        return np.asarray(self.series[-n:], dtype=np.float64)


def trend_fit(window: QberWindow, n: int) -> Tuple[float, float]:
    """Least-squares line over the last ``n`` windows: (rise across them, fitted latest QBER)."""
    tail = window.tail(n)
    t = np.arange(len(tail), dtype=np.float64)
    slope, intercept = np.polyfit(t, tail, 1)
    return float(slope * t[-1]), float(intercept + slope * t[-1])


def classify(window: QberWindow, cfg: Optional[SyncConfig] = None) -> QberClass:
    """OK, SLOW_DEGRADE or RAPID_LOSS for the newest window.

    RAPID_LOSS when the latest QBER reaches ``rapid_threshold``. SLOW_DEGRADE
    when the least-squares line over the last ``trend_windows`` windows rises
    by at least ``trend_threshold`` and ends at least ``trend_threshold``
    above the baseline.

    Raises:
        SyncContractError: Fewer than two windows recorded
    """
    cfg = cfg or SyncConfig()
    if len(window.series) < 2:
        raise SyncContractError(
            f"classification needs at least 2 windows, got {len(window.series)}"
        )
    if window.series[-1] >= cfg.rapid_threshold:
        return QberClass.RAPID_LOSS
    rise, level = trend_fit(window, cfg.trend_windows)
    # float slack keeps the class stable when the whole series shifts
    threshold = cfg.trend_threshold - 1e-12
    if rise >= threshold and level - cfg.baseline_qber >= threshold:
        return QberClass.SLOW_DEGRADE
    return QberClass.OK
