"""Signal and measurement records of the physical layer."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ..errors import ConfigurationError
from ..models import Basis, Outcome

Bloch = Tuple[float, float, float]

BASIS_AXES = {
    Basis.X: (1.0, 0.0, 0.0),
    Basis.Y: (0.0, 1.0, 0.0),
}


def bb84_bloch(basis: Basis, bit: int) -> Bloch:
    """Bloch point of a BB84 state; bit 0 is the positive pole of the basis axis."""
    if bit not in (0, 1):
        raise ConfigurationError(f"bit must be 0 or 1, got {bit!r}")
    x, y, z = BASIS_AXES[Basis(basis)]
    sign = 1.0 if bit == 0 else -1.0
    return (sign * x, sign * y, sign * z)


def phase_to_bloch(phi: float) -> Bloch:
    """Map a phase-coding relative phase onto the equator of the Bloch sphere.

    0 -> (1,0,0), pi -> (-1,0,0), pi/2 -> (0,1,0), 3pi/2 -> (0,-1,0).
    """
    return (math.cos(phi), math.sin(phi), 0.0)


@dataclass(slots=True)
class QubitPulse:
    """Polarization-encoded pulse: photon number plus one shared Bloch vector."""
    n: int
    bloch: Bloch
    class_id: str
    slot: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ConfigurationError("photon number must be >= 0")
        if math.sqrt(sum(c * c for c in self.bloch)) > 1.0 + 1e-12:
            raise ConfigurationError("Bloch vector norm must be <= 1")


@dataclass(slots=True)
class CoherentTrain:
    """Complex amplitudes per slot, sqrt(photon) units."""
    amps: np.ndarray
    global_phase_randomized: bool = False

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=complex)
        if not np.all(np.isfinite(self.amps)):
            raise ConfigurationError("coherent amplitudes must be finite")

    def __len__(self) -> int:
        return len(self.amps)

    @property
    def mean_photon_numbers(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(slots=True)
class DetectionRecord:
    """Outcome of one detection slot."""
    slot: int
    basis_used: Optional[Basis]
    outcome: Outcome
    monitor_ok: Optional[bool] = None
    double_click: bool = False

    @property
    def clicked(self) -> bool:
        """A conclusive bit value was assigned."""
        return self.outcome in (Outcome.BIT0, Outcome.BIT1)

    @property
    def bit(self) -> Optional[int]:
        if self.outcome is Outcome.BIT0:
            return 0
        if self.outcome is Outcome.BIT1:
            return 1
        return None


@dataclass
class DetectorHistory:
    """Last firing gate of each detector, for the afterpulse model."""
    last_fire: List[Optional[int]] = field(default_factory=lambda: [None, None])

    def reset(self) -> None:
        self.last_fire = [None, None]
