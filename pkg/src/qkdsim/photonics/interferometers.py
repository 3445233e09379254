"""Interferometric receivers for the DPS and strong-reference B92 protocols."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from ..errors import MalformedSignalError
from ..models import B92Config, DetectorModel
from .detectors import detect_outputs
from .signals import CoherentTrain, DetectionRecord, DetectorHistory


def interfere_train(train: CoherentTrain, delay: int = 1,
                    phase_offset: Union[float, np.ndarray] = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """One-pulse-delay Mach-Zehnder interferometer.

    Returns the output amplitudes of both ports for every interior slot:
    ``a0 = (a_k + e^{i phi} a_{k+d}) / 2`` and ``a1 = (a_k - e^{i phi} a_{k+d}) / 2``.

    Raises:
        MalformedSignalError: Train shorter than ``delay + 1`` pulses
    """
    if delay < 1 or len(train) < delay + 1:
        raise MalformedSignalError(
            f"interferometer needs at least {delay + 1} pulses, got {len(train)}"
        )
    early = train.amps[:-delay]
    late = train.amps[delay:] * np.exp(1j * phase_offset)
    return (early + late) / 2.0, (early - late) / 2.0


@dataclass(frozen=True)
class B92Receiver:
    """Bob's strong-reference B92 receiver.

    ``split`` of the reference is tapped to interfere with the signal; the
    remainder is counted by the monitoring detector.
    """

    split: float
    window: Tuple[int, int]
    detector: DetectorModel
    phase_offset: float = 0.0

    @classmethod
    def from_config(cls, cfg: B92Config, mu_signal: float, detector: DetectorModel,
                    expected_eta: float, phase_offset: float = 0.0) -> "B92Receiver":
        """Receiver matched to the nominal intensities and the expected channel loss."""
        split = min(1.0, mu_signal / cfg.reference_mu)
        if cfg.monitor_window is not None:
            window = cfg.monitor_window
        else:
            lam = expected_eta * cfg.reference_mu * (1.0 - split)
            spread = cfg.window_sigmas * math.sqrt(lam)
            window = (max(0, math.floor(lam - spread)), math.ceil(lam + spread))
        return cls(split=split, window=window, detector=detector, phase_offset=phase_offset)


def b92_measure(train: CoherentTrain, receiver: B92Receiver, rng: np.random.Generator,
                slot: int = 0, history: Optional[DetectorHistory] = None) -> DetectionRecord:
    """Decode a signal/reference pair and check the reference intensity.

    Raises:
        MalformedSignalError: Input is not a two-mode signal
    """
    if len(train) != 2:
        raise MalformedSignalError(f"B92 expects a two-mode signal, got {len(train)} modes")
    history = history if history is not None else DetectorHistory()
    signal, reference = train.amps
    tapped = reference * math.sqrt(receiver.split)
    rotated = signal * np.exp(1j * receiver.phase_offset)
    d0 = (rotated + tapped) / math.sqrt(2.0)
    d1 = (rotated - tapped) / math.sqrt(2.0)
    monitor_count = int(rng.poisson(abs(reference) ** 2 * (1.0 - receiver.split)))
    record = detect_outputs(abs(d0) ** 2, abs(d1) ** 2, receiver.detector, slot, history, rng)
    m_lo, m_hi = receiver.window
    record.monitor_ok = m_lo <= monitor_count <= m_hi
    return record
