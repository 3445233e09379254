"""Lossy, misaligned quantum channel."""

import math

import numpy as np

from ..models import ChannelModel
from .signals import Bloch, CoherentTrain, QubitPulse


def rotate_z(bloch: Bloch, angle: float) -> Bloch:
    """Rotate a Bloch vector about the Z axis."""
    if angle == 0.0:
        return bloch
    c, s = math.cos(angle), math.sin(angle)
    x, y, z = bloch
    return (c * x - s * y, s * x + c * y, z)


def misalignment_for_qber(qber: float) -> float:
    """Misalignment angle producing an intrinsic error rate of ``qber`` (sin^2(theta/2))."""
    return 2.0 * math.asin(math.sqrt(qber))


def channel_transmit(pulse: QubitPulse, ch: ChannelModel, rng: np.random.Generator) -> QubitPulse:
    """Binomial photon loss followed by a fixed misalignment rotation."""
    eta = ch.transmittance
    n = pulse.n
    if n and eta < 1.0:
        n = int(rng.binomial(n, eta))
    return QubitPulse(n=n, bloch=rotate_z(pulse.bloch, ch.misalignment_angle),
                      class_id=pulse.class_id, slot=pulse.slot)


def channel_transmit_train(train: CoherentTrain, ch: ChannelModel) -> CoherentTrain:
    """Coherent states stay coherent under loss: alpha -> alpha * sqrt(eta)."""
    return CoherentTrain(amps=train.amps * math.sqrt(ch.transmittance),
                         global_phase_randomized=train.global_phase_randomized)
