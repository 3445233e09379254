"""Gated threshold detector pair with dark counts and afterpulsing."""

import math
from typing import Optional, Sequence

import numpy as np

from ..models import Basis, DetectorModel, DoubleClickPolicy, Outcome
from .signals import DetectionRecord, DetectorHistory, QubitPulse


def afterpulse_probability(det: DetectorModel, gap: Optional[int]) -> float:
    """Excess firing probability ``gap`` gates after the detector last fired."""
    if gap is None or det.afterpulse_p0 == 0.0 or gap <= det.blanking_gates:
        return 0.0
    return det.afterpulse_p0 * math.exp(-gap / det.afterpulse_tau)


def _fires(det: DetectorModel, index: int, p_signal: float, slot: int,
           history: DetectorHistory, u: float) -> bool:
    last = history.last_fire[index]
    p_after = afterpulse_probability(det, None if last is None else slot - last)
    p_fire = 1.0 - (1.0 - p_signal) * (1.0 - det.dark) * (1.0 - p_after)
    return u < p_fire


def _resolve(det: DetectorModel, fire0: bool, fire1: bool, slot: int, history: DetectorHistory,
             rng: np.random.Generator, basis: Optional[Basis]) -> DetectionRecord:
    if fire0:
        history.last_fire[0] = slot
    if fire1:
        history.last_fire[1] = slot
    if fire0 and fire1:
        if det.double_click_policy is DoubleClickPolicy.DISCARD:
            return DetectionRecord(slot=slot, basis_used=basis, outcome=Outcome.DOUBLE,
                                   double_click=True)
        outcome = Outcome.BIT0 if rng.random() < 0.5 else Outcome.BIT1
        return DetectionRecord(slot=slot, basis_used=basis, outcome=outcome, double_click=True)
    if fire0:
        return DetectionRecord(slot=slot, basis_used=basis, outcome=Outcome.BIT0)
    if fire1:
        return DetectionRecord(slot=slot, basis_used=basis, outcome=Outcome.BIT1)
    return DetectionRecord(slot=slot, basis_used=basis, outcome=Outcome.NONE)


def measure_qubit(pulse: QubitPulse, basis_axis: Sequence[float], det: DetectorModel,
                  history: DetectorHistory, rng: np.random.Generator,
                  basis: Optional[Basis] = None) -> DetectionRecord:
    """Projective measurement of every photon along ``basis_axis``.

    Each photon goes to detector 0 with probability (1 + r.a)/2; a detector
    fires if a routed photon passes its efficiency, on a dark count, or on an
    afterpulse of its previous firing.

    Args:
        pulse: Received pulse
        basis_axis: Unit measurement axis
        det: Detector model
        history: Per-detector firing history, updated in place
        rng: Bob's randomness
        basis: Basis label stored on the record

    Returns:
        DetectionRecord for ``pulse.slot``
    """
    p0 = 0.0
    k0 = k1 = 0
    if pulse.n:
        r_dot_a = sum(r * a for r, a in zip(pulse.bloch, basis_axis))
        p0 = min(1.0, max(0.0, 0.5 * (1.0 + r_dot_a)))
        if pulse.n == 1:
            k0 = 1 if rng.random() < p0 else 0
        else:
            k0 = int(rng.binomial(pulse.n, p0))
        k1 = pulse.n - k0
    p_signal0 = 1.0 - (1.0 - det.eff0) ** k0
    p_signal1 = 1.0 - (1.0 - det.eff1) ** k1
    u0, u1 = rng.random(), rng.random()
    fire0 = _fires(det, 0, p_signal0, pulse.slot, history, u0)
    fire1 = _fires(det, 1, p_signal1, pulse.slot, history, u1)
    return _resolve(det, fire0, fire1, pulse.slot, history, rng, basis)


def detect_outputs(mean0: float, mean1: float, det: DetectorModel, slot: int,
                   history: DetectorHistory, rng: np.random.Generator,
                   basis: Optional[Basis] = None) -> DetectionRecord:
    """Click model for coherent light at the two output ports of an interferometer."""
    p_signal0 = 1.0 - math.exp(-det.eff0 * mean0)
    p_signal1 = 1.0 - math.exp(-det.eff1 * mean1)
    u0, u1 = rng.random(2)
    fire0 = _fires(det, 0, p_signal0, slot, history, u0)
    fire1 = _fires(det, 1, p_signal1, slot, history, u1)
    return _resolve(det, fire0, fire1, slot, history, rng, basis)
