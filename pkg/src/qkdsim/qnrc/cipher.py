"""Y00 phase-keyed encryption and the legitimate receiver.

Quadrature convention: x = (a + a^dagger)/2, so a coherent state has
quadrature variance 1/4 and heterodyne detection adds one vacuum unit
(variance 1/2 per quadrature).
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..errors import ConfigurationError
from ..models import Y00Config

HOMODYNE_VARIANCE = 0.25
HETERODYNE_VARIANCE = 0.5


@dataclass(slots=True)
class Y00Symbol:
    """Transmitted coherent state alpha e^{i theta}."""

    amplitude: complex
    slot: int = 0


@dataclass(slots=True)
class HomodyneOutcome:
    """One quadrature sample taken at angle ``angle``."""

    angle: float
    value: float


def _check_running_key(z: np.ndarray, cfg: Y00Config) -> None:
    if np.any(z < 0) or np.any(z >= cfg.M):
        raise ConfigurationError(f"running-key values must lie in [0, {cfg.M})")


def signal_phase(x: np.ndarray, z: np.ndarray, cfg: Y00Config) -> np.ndarray:
    """theta = (Z/M + (X xor Pol(Z))) pi with Pol(Z) = Z mod 2."""
    x = np.asarray(x, dtype=np.int64)
    z = np.asarray(z, dtype=np.int64)
    _check_running_key(z, cfg)
    return (z / cfg.M + ((x ^ (z & 1)) & 1)) * math.pi


def encrypt_block(x: np.ndarray, z: np.ndarray, cfg: Y00Config) -> np.ndarray:
    """Complex amplitudes alpha e^{i theta} for plaintext bits ``x`` under running key ``z``."""
    return cfg.alpha * np.exp(1j * signal_phase(x, z, cfg))


def transmit_block(amps: np.ndarray, cfg: Y00Config) -> np.ndarray:
    """Pure-loss channel: amplitudes scaled by sqrt(eta)."""
    return np.asarray(amps) * math.sqrt(cfg.channel_eta)


def homodyne_block(amps: np.ndarray, betas: np.ndarray, rng: np.random.Generator,
                   excess_noise: float = 0.0) -> np.ndarray:
    """Samples ~ N(|A| cos(arg A - beta), 1/4 + excess)."""
    amps = np.asarray(amps, dtype=np.complex128)
    mean = np.abs(amps) * np.cos(np.angle(amps) - np.asarray(betas, dtype=np.float64))
    return mean + rng.normal(0.0, math.sqrt(HOMODYNE_VARIANCE + excess_noise), size=mean.shape)


def heterodyne_block(amps: np.ndarray, rng: np.random.Generator,
                     excess_noise: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Both quadratures, each ~ N(Re/Im A, 1/2 + excess)."""
    amps = np.asarray(amps, dtype=np.complex128)
    sigma = math.sqrt(HETERODYNE_VARIANCE + excess_noise)
    p = amps.real + rng.normal(0.0, sigma, size=amps.shape)
    q = amps.imag + rng.normal(0.0, sigma, size=amps.shape)
    return p, q


def receiver_angles(z: np.ndarray, cfg: Y00Config) -> np.ndarray:
    """Bob's homodyne angle beta = Z pi / M."""
    return np.asarray(z, dtype=np.float64) * math.pi / cfg.M


def decrypt_block(values: np.ndarray, z: np.ndarray, cfg: Y00Config) -> np.ndarray:
    """Bit = (value < 0) xor Pol(Z)."""
    z = np.asarray(z, dtype=np.int64)
    return ((np.asarray(values) < 0).astype(np.int64) ^ (z & 1)).astype(np.uint8)


def y00_encrypt(x: int, z: int, cfg: Y00Config, slot: int = 0) -> Y00Symbol:
    """Encrypt one bit.

    Raises:
        ConfigurationError: ``z`` outside [0, M)
    """
    amp = encrypt_block(np.array([x]), np.array([z]), cfg)[0]
    return Y00Symbol(amplitude=complex(amp), slot=slot)


def y00_transmit(sym: Y00Symbol, cfg: Y00Config) -> Y00Symbol:
    return Y00Symbol(amplitude=sym.amplitude * math.sqrt(cfg.channel_eta), slot=sym.slot)


def homodyne_measure(sym: Y00Symbol, beta: float, rng: np.random.Generator,
                     excess_noise: float = 0.0) -> HomodyneOutcome:
    value = homodyne_block(np.array([sym.amplitude]), np.array([beta]), rng, excess_noise)[0]
    return HomodyneOutcome(angle=beta, value=float(value))


def heterodyne_measure(sym: Y00Symbol, rng: np.random.Generator,
                       excess_noise: float = 0.0) -> Tuple[HomodyneOutcome, HomodyneOutcome]:
    p, q = heterodyne_block(np.array([sym.amplitude]), rng, excess_noise)
    return HomodyneOutcome(0.0, float(p[0])), HomodyneOutcome(math.pi / 2.0, float(q[0]))


def y00_decrypt(outcome: HomodyneOutcome, z: int, cfg: Y00Config) -> int:
    """Decode a homodyne sample taken at the running-key angle Z pi / M."""
    return int(decrypt_block(np.array([outcome.value]), np.array([z]), cfg)[0])
