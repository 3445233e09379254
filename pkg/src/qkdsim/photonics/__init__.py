"""Physical-layer models: sources, channels, detectors and interferometric receivers."""

from .calibration import (
    DarkCountEstimate,
    consecutive_click_correlation,
    measure_afterpulse_curve,
    measure_dark_counts,
)
from .channel import channel_transmit, channel_transmit_train, misalignment_for_qber, rotate_z
from .detectors import afterpulse_probability, detect_outputs, measure_qubit
from .interferometers import B92Receiver, b92_measure, interfere_train
from .signals import (
    BASIS_AXES,
    CoherentTrain,
    DetectionRecord,
    DetectorHistory,
    QubitPulse,
    bb84_bloch,
    phase_to_bloch,
)
from .sources import (
    emit_phase_train,
    emit_state,
    emit_two_mode,
    emit_weak_pulse,
    sample_photon_number,
    sample_photon_numbers,
)

__all__ = [
    "BASIS_AXES",
    "B92Receiver",
    "CoherentTrain",
    "DarkCountEstimate",
    "DetectionRecord",
    "DetectorHistory",
    "QubitPulse",
    "afterpulse_probability",
    "b92_measure",
    "bb84_bloch",
    "channel_transmit",
    "channel_transmit_train",
    "consecutive_click_correlation",
    "detect_outputs",
    "emit_phase_train",
    "emit_state",
    "emit_two_mode",
    "emit_weak_pulse",
    "interfere_train",
    "measure_afterpulse_curve",
    "measure_dark_counts",
    "measure_qubit",
    "misalignment_for_qber",
    "phase_to_bloch",
    "rotate_z",
    "sample_photon_number",
    "sample_photon_numbers",
]
