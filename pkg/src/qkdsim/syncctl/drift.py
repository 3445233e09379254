"""Deterministic drift of channel alignment and transmittance."""

import math
from typing import Tuple

import numpy as np

from ..models import ChannelModel

SLOTS_PER_UNIT = 1000.0


def _elapsed_units(channel: ChannelModel, slot: int) -> float:
    assert channel.drift is not None
    return max(0, slot - channel.drift.onset) / SLOTS_PER_UNIT


def drifted_parameters(channel: ChannelModel, slot: int) -> Tuple[float, float]:
    """(transmittance, misalignment) of the channel at ``slot``."""
    if channel.drift is None:
        return channel.transmittance, channel.misalignment_angle
    units = _elapsed_units(channel, slot)
    angle = channel.misalignment_angle + channel.drift.phase_drift_rate * units
    eta = channel.transmittance * channel.drift.transmittance_drift ** units
    return min(1.0, max(0.0, eta)), min(math.pi, max(0.0, angle))


def apply_drift(channel: ChannelModel, slot: int) -> ChannelModel:
    """Channel with misalignment and loss advanced to ``slot``.

    Zero drift rates return the channel unchanged.
    """
    drift = channel.drift
    if drift is None or (drift.phase_drift_rate == 0.0 and drift.transmittance_drift == 1.0):
        return channel
    units = _elapsed_units(channel, slot)
    _, angle = drifted_parameters(channel, slot)
    if drift.transmittance_drift == 0.0:
        extra_db = math.inf if units > 0 else 0.0
    else:
        extra_db = -10.0 * units * math.log10(drift.transmittance_drift)
    return channel.model_copy(update={"loss_db": channel.loss_db + extra_db,
                                      "misalignment_angle": angle})


def drift_profile(channel: ChannelModel, n_slots: int) -> Tuple[np.ndarray, np.ndarray]:
    """Per-slot transmittance and misalignment arrays for ``n_slots`` slots."""
    slots = np.arange(n_slots)
    if channel.drift is None:
        return (np.full(n_slots, channel.transmittance),
                np.full(n_slots, channel.misalignment_angle))
    units = np.maximum(0, slots - channel.drift.onset) / SLOTS_PER_UNIT
    etas = channel.transmittance * channel.drift.transmittance_drift ** units
    angles = channel.misalignment_angle + channel.drift.phase_drift_rate * units
    return np.clip(etas, 0.0, 1.0), np.clip(angles, 0.0, math.pi)


def advance_channel(channel: ChannelModel, slots: int) -> ChannelModel:
    """Channel whose slot 0 is slot ``slots`` of ``channel``, drift continuing from there."""
    if channel.drift is None or slots <= 0:
        return channel
    moved = apply_drift(channel, slots)
    onset = max(0, channel.drift.onset - slots)
    return moved.model_copy(update={"drift": channel.drift.model_copy(update={"onset": onset})})
