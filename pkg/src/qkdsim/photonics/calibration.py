"""Local detector calibration: afterpulse curve and dark-count rate."""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..bounds import clopper_pearson_upper
from ..models import DetectorModel, Outcome
from .detectors import detect_outputs
from .signals import DetectionRecord, DetectorHistory


@dataclass(frozen=True)
class DarkCountEstimate:
    """Per-gate dark-count probability measured with the input closed."""
    gates: int
    clicks: int
    per_gate: float
    upper: float


def measure_dark_counts(det: DetectorModel, gates: int, rng: np.random.Generator,
                        confidence: float = 0.999) -> DarkCountEstimate:
    """Count detector-0 firings over ``gates`` dark gates."""
    history = DetectorHistory()
    clicks = 0
    for gate in range(gates):
        detect_outputs(0.0, 0.0, det, gate, history, rng)
        if history.last_fire[0] == gate:
            clicks += 1
    return DarkCountEstimate(
        gates=gates,
        clicks=clicks,
        per_gate=clicks / gates if gates else 0.0,
        upper=clopper_pearson_upper(clicks, gates, confidence),
    )


def measure_afterpulse_curve(det: DetectorModel, gaps: Sequence[int], trials: int,
                             rng: np.random.Generator) -> List[Tuple[int, float]]:
    """Afterpulse probability versus gate interval.

    For each gap a bright pulse fires detector 0, then a dark gate is opened
    ``gap`` gates later; the excess over the dark-count rate is reported.
    """
    curve = []
    for gap in gaps:
        fired = 0
        for _ in range(trials):
            history = DetectorHistory(last_fire=[0, None])
            detect_outputs(0.0, 0.0, det, gap, history, rng)
            if history.last_fire[0] == gap:
                fired += 1
        excess = max(0.0, fired / trials - det.dark)
        curve.append((gap, excess / (1.0 - det.dark)))
    return curve


def consecutive_click_correlation(records: Sequence[DetectionRecord]) -> float:
    """P(click at k+1 | click at k) - P(click); positive when afterpulses dominate."""
    clicks = np.array([r.outcome is not Outcome.NONE for r in records], dtype=bool)
    if len(clicks) < 2 or not clicks[:-1].any():
        return 0.0
    conditional = clicks[1:][clicks[:-1]].mean()
    return float(conditional - clicks.mean())
