"""Keyless observer of the Y00 signal: nearest-state estimates and masking counts."""

import math
from typing import Tuple

import numpy as np

from ..models import Y00Config
from .cipher import HomodyneOutcome, signal_phase

HETERODYNE_PHASE_STD = math.sqrt(0.5)


def _state_index(p: np.ndarray, q: np.ndarray, cfg: Y00Config) -> np.ndarray:
    phase = np.mod(np.arctan2(q, p), 2.0 * math.pi)
    return np.rint(phase / (math.pi / cfg.M)).astype(np.int64) % (2 * cfg.M)


def eve_nearest_block(p: np.ndarray, q: np.ndarray, cfg: Y00Config) -> Tuple[np.ndarray, np.ndarray]:
    """(X_hat, Z_hat) of the nearest of the 2M signal states to each heterodyne sample."""
    k = _state_index(np.asarray(p), np.asarray(q), cfg)
    z_hat = k % cfg.M
    x_hat = ((k // cfg.M) ^ (z_hat & 1)).astype(np.uint8)
    return x_hat, z_hat


def eve_nearest_state(heterodyne: Tuple[HomodyneOutcome, HomodyneOutcome],
                      cfg: Y00Config) -> Tuple[int, int]:
    """Ciphertext-only estimate of (X, Z) from one heterodyne pair."""
    p, q = heterodyne
    x_hat, z_hat = eve_nearest_block(np.array([p.value]), np.array([q.value]), cfg)
    return int(x_hat[0]), int(z_hat[0])


def eve_known_plaintext(p: np.ndarray, q: np.ndarray, x: np.ndarray, cfg: Y00Config) -> np.ndarray:
    """Z_hat restricted to the M states consistent with the known plaintext bits ``x``."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    x = np.asarray(x, dtype=np.int64)
    candidates = np.arange(cfg.M)
    # candidate phases per symbol: shape (n, M)
    phases = signal_phase(np.broadcast_to(x[:, None], (len(x), cfg.M)),
                          np.broadcast_to(candidates, (len(x), cfg.M)), cfg)
    measured = np.arctan2(q, p)[:, None]
    distance = np.abs(np.angle(np.exp(1j * (measured - phases))))
    return np.argmin(distance, axis=1)


def masking_count(cfg: Y00Config) -> int:
    """Gamma = 1 + 2 floor(sigma_phase / (pi/M)), sigma_phase = sqrt(1/2)/|A|."""
    sigma_phase = HETERODYNE_PHASE_STD / cfg.received_amplitude
    return 1 + 2 * math.floor(sigma_phase / (math.pi / cfg.M))


def masking_count_empirical(offsets: np.ndarray, cfg: Y00Config) -> int:
    """Monte-Carlo counterpart of Gamma from Eve's state-index offsets.

    Offsets are wrapped to [-M, M); their RMS spread in state spacings
    stands in for sigma_phase / (pi/M).
    """
    wrapped = (np.asarray(offsets, dtype=np.int64) + cfg.M) % (2 * cfg.M) - cfg.M
    if len(wrapped) == 0:
        return 1
    # Sheppard's correction for the rounding to whole states
    variance = max(0.0, float(np.mean(wrapped.astype(np.float64) ** 2)) - 1.0 / 12.0)
    return 1 + 2 * math.floor(math.sqrt(variance))
