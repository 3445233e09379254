"""Photon-number-splitting attack with analytic yield matching."""

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import structlog

from ..bounds import multi_photon_probability, single_photon_probability
from ..models import AttackConfig, AttackKind, Basis, ChannelModel, DetectorModel, SourceConfig
from ..photonics.channel import rotate_z
from ..photonics.signals import QubitPulse
from .base import Attack, EveRecord, registry

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class PNSPolicy:
    """Forwarding probabilities per photon-number class.

    ``target_arrival`` is the probability with which a photon must reach Bob
    for his click rate to look like the honest channel at ``target_mu``.
    """

    target_mu: float
    target_arrival: float
    p_single: float
    p_multi: float
    saturated: bool

    @classmethod
    def solve(cls, target_mu: float, eta: float, detector_eff: float = 1.0) -> "PNSPolicy":
        """Block single photons first; fall back to blocking multi-photon pulses."""
        eff = max(detector_eff, 1e-12)
        arrival = min(1.0, (1.0 - math.exp(-eta * eff * target_mu)) / eff)
        p1 = single_photon_probability(target_mu)
        pm = multi_photon_probability(target_mu)
        if pm <= arrival:
            p_single = 1.0 if p1 == 0.0 else min(1.0, (arrival - pm) / p1)
            return cls(target_mu, arrival, p_single, 1.0, saturated=False)
        return cls(target_mu, arrival, 0.0, arrival / pm, saturated=True)

    def forward_probability(self, mu: float) -> float:
        """Probability that a pulse of intensity ``mu`` delivers a photon to Bob."""
        return (self.p_single * single_photon_probability(mu)
                + self.p_multi * multi_photon_probability(mu))


def pns_transform(pulse: QubitPulse, policy: PNSPolicy,
                  rng: np.random.Generator) -> Tuple[QubitPulse, EveRecord]:
    """Split off all but one photon of a multi-photon pulse, block single photons by policy.

    Returns:
        (pulse forwarded over Eve's lossless line, record of stored photons)
    """
    n = pulse.n
    record = EveRecord(slot=pulse.slot, intercepted=n > 0, photons=n, stored_bloch=pulse.bloch)
    if n == 0:
        forward = 0
    elif n == 1:
        forward = 1 if rng.random() < policy.p_single else 0
    else:
        forward = 1 if policy.p_multi >= 1.0 or rng.random() < policy.p_multi else 0
    record.stored_photons = n - forward
    return QubitPulse(n=forward, bloch=pulse.bloch, class_id=pulse.class_id, slot=pulse.slot), record


@registry.register
class PNSAttack(Attack):
    """PNS adversary tuned so Bob's signal click rate matches the honest channel."""

    kind = AttackKind.PNS

    def __init__(self, config: AttackConfig, policy: PNSPolicy, detector_eff: float = 1.0):
        super().__init__(config)
        self.policy = policy
        self.detector_eff = detector_eff
        if policy.saturated:
            logger.warning(
                "pns_saturated",
                target_mu=policy.target_mu,
                arrival=policy.target_arrival,
                p_multi=policy.p_multi,
            )

    @classmethod
    def from_link(cls, config: AttackConfig, source: SourceConfig, channel: ChannelModel,
                  detector: DetectorModel) -> "PNSAttack":
        target_mu = config.target_mu
        if target_mu is None:
            target_mu = source.mu(source.signal_class)
        eff = detector.mean_efficiency
        return cls(config, PNSPolicy.solve(target_mu, channel.transmittance, eff), eff)

    @property
    def supports_qubits(self) -> bool:
        return True

    @property
    def saturated(self) -> bool:
        return self.policy.saturated

    def transform_qubit(self, pulse: QubitPulse, channel: ChannelModel, alice_basis: Optional[Basis],
                        channel_rng: np.random.Generator,
                        eve_rng: np.random.Generator) -> QubitPulse:
        forwarded, record = pns_transform(pulse, self.policy, eve_rng)
        if record.intercepted:
            self.records.append(record)
        forwarded.bloch = rotate_z(forwarded.bloch, channel.misalignment_angle)
        return forwarded

    def expected_forward_probability(self, mu: float) -> float:
        return self.policy.forward_probability(mu)

    def expected_detection_probability(self, mu: float) -> float:
        """Signal-photon detection probability at Bob, before dark counts."""
        return self.detector_eff * self.expected_forward_probability(mu)

    def expected_gain(self, mu: float, detector: DetectorModel) -> float:
        """Bob's expected click probability for intensity ``mu`` under this attack."""
        y0 = 1.0 - (1.0 - detector.dark) ** 2
        p_det = detector.mean_efficiency * self.expected_forward_probability(mu)
        return 1.0 - (1.0 - y0) * (1.0 - p_det)

    def describe(self) -> Dict[str, object]:
        return {
            "attack": self.kind.value,
            "target_mu": self.policy.target_mu,
            "p_single": self.policy.p_single,
            "p_multi": self.policy.p_multi,
            "saturated": self.policy.saturated,
            "stored_photons": sum(r.stored_photons for r in self.records),
        }
