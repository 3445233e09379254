"""Base interface for channel-replacement attacks."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, List, Optional, Type

import numpy as np

from ..errors import ConfigurationError, ProtocolMismatchError
from ..models import AttackConfig, AttackKind, Basis, ChannelModel, DetectorModel, SourceConfig
from ..photonics.signals import Bloch, CoherentTrain, QubitPulse


@dataclass(slots=True)
class EveRecord:
    """What the adversary learned in one slot."""
    slot: int
    intercepted: bool = False
    basis: Optional[Basis] = None
    bit: Optional[int] = None
    photons: int = 0
    stored_photons: int = 0
    stored_bloch: Optional[Bloch] = None
    usd_success: Optional[bool] = None


class Attack(ABC):
    """A pulse-stream transformer that replaces the honest channel."""

    kind: AttackKind

    def __init__(self, config: AttackConfig):
        """Initialize the attack.

        Args:
            config: Attack configuration
        """
        self.config = config
        self.records: List[EveRecord] = []

    @classmethod
    def from_link(cls, config: AttackConfig, source: SourceConfig, channel: ChannelModel,
                  detector: DetectorModel) -> "Attack":
        """Build the attack for a concrete link; link-independent attacks ignore it."""
        return cls(config)

    @property
    def supports_qubits(self) -> bool:
        return False

    @property
    def supports_coherent(self) -> bool:
        return False

    def transform_qubit(self, pulse: QubitPulse, channel: ChannelModel, alice_basis: Optional[Basis],
                        channel_rng: np.random.Generator,
                        eve_rng: np.random.Generator) -> QubitPulse:
        """Transform one polarization pulse on its way to Bob."""
        raise ProtocolMismatchError(f"{self.kind.value} does not act on qubit pulses")

    def transform_train(self, train: CoherentTrain, channel: ChannelModel,
                        eve_rng: np.random.Generator) -> CoherentTrain:
        """Transform a whole DPS pulse train."""
        raise ProtocolMismatchError(f"{self.kind.value} does not act on pulse trains")

    def transform_two_mode(self, train: CoherentTrain, channel: ChannelModel, slot: int,
                           eve_rng: np.random.Generator) -> CoherentTrain:
        """Transform one B92 signal/reference pair."""
        raise ProtocolMismatchError(f"{self.kind.value} does not act on two-mode signals")

    @abstractmethod
    def describe(self) -> Dict[str, object]:
        """Flat description of the attack parameters and evidence counters."""
        pass


class AttackRegistry:
    """Registry of available attack implementations."""

    def __init__(self) -> None:
        """Initialize registry."""
        self._attacks: Dict[AttackKind, Type[Attack]] = {}

    def register(self, attack_cls: Type[Attack]) -> Type[Attack]:
        """Register an attack class (usable as a decorator)."""
        self._attacks[attack_cls.kind] = attack_cls
        return attack_cls

    def get(self, kind: AttackKind) -> Type[Attack]:
        """Get an attack class by kind."""
        if kind not in self._attacks:
            raise ConfigurationError(f"no attack registered for {kind}")
        return self._attacks[kind]

    def list_all(self) -> List[AttackKind]:
        """List all registered kinds."""
        return sorted(self._attacks, key=lambda k: k.value)


registry = AttackRegistry()


def build_attack(config: AttackConfig, source: SourceConfig, channel: ChannelModel,
                 detector: Optional[DetectorModel] = None) -> Attack:
    """Instantiate the attack described by ``config`` for a given link."""
    attack_cls = registry.get(config.kind)
    return attack_cls.from_link(config, source, channel, detector or DetectorModel())
