"""Weak-coherent and ideal single-photon sources."""

from typing import List

import numpy as np

from ..models import Basis, PhotonStatistics, SourceConfig
from .signals import Bloch, CoherentTrain, QubitPulse, bb84_bloch


def sample_photon_number(cfg: SourceConfig, class_id: str, rng: np.random.Generator) -> int:
    """Photon number of one pulse of the given intensity class."""
    mu = cfg.mu(class_id)
    if mu == 0.0:
        return 0
    if cfg.photon_statistics is PhotonStatistics.SINGLE_PHOTON:
        return 1
    return int(rng.poisson(mu))


def emit_state(cfg: SourceConfig, class_id: str, bloch: Bloch, rng: np.random.Generator,
               slot: int = 0) -> QubitPulse:
    """Emit an arbitrary equatorial state from the source."""
    return QubitPulse(n=sample_photon_number(cfg, class_id, rng), bloch=bloch,
                      class_id=class_id, slot=slot)


def emit_weak_pulse(cfg: SourceConfig, class_id: str, bit: int, basis: Basis,
                    rng: np.random.Generator, slot: int = 0) -> QubitPulse:
    """Emit a BB84 state with Poissonian (or single-photon) photon number.

    Args:
        cfg: Source configuration
        class_id: Intensity class of this pulse
        bit: Encoded bit
        basis: Preparation basis
        rng: Source randomness
        slot: Time slot index

    Returns:
        The emitted pulse

    Raises:
        ConfigurationError: Unknown class or invalid bit
    """
    return emit_state(cfg, class_id, bb84_bloch(basis, bit), rng, slot)


def emit_phase_train(mu: float, phase_bits: np.ndarray) -> CoherentTrain:
    """Coherent pulse train with phases 0 / pi selected by ``phase_bits``."""
    amps = np.sqrt(mu) * np.where(np.asarray(phase_bits) == 0, 1.0, -1.0)
    return CoherentTrain(amps=amps.astype(complex), global_phase_randomized=False)


def emit_two_mode(mu: float, reference_mu: float, bit: int) -> CoherentTrain:
    """B92 signal/reference pair: signal +alpha for bit 0, -alpha for bit 1."""
    alpha = np.sqrt(mu) * (1.0 if bit == 0 else -1.0)
    return CoherentTrain(amps=np.array([alpha, np.sqrt(reference_mu)], dtype=complex))


def sample_photon_numbers(cfg: SourceConfig, class_ids: List[str],
                          rng: np.random.Generator) -> np.ndarray:
    """Vectorised photon numbers for a whole block of pulses."""
    mus = np.array([cfg.mu(c) for c in class_ids], dtype=float)
    if cfg.photon_statistics is PhotonStatistics.SINGLE_PHOTON:
        return (mus > 0.0).astype(np.int64)
    return rng.poisson(mus).astype(np.int64)
