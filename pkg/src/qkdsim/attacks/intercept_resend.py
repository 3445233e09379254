"""Intercept-resend attack on polarization qubits."""

from typing import Dict, Optional, Tuple

import numpy as np

from ..models import AttackKind, Basis, ChannelModel, EveBasisStrategy
from ..photonics.channel import channel_transmit, rotate_z
from ..photonics.signals import BASIS_AXES, QubitPulse, bb84_bloch
from .base import Attack, EveRecord, registry


def _choose_basis(strategy: EveBasisStrategy, alice_basis: Optional[Basis],
                  rng: np.random.Generator) -> Basis:
    if strategy is EveBasisStrategy.MATCHING and alice_basis is not None:
        return alice_basis
    if strategy is EveBasisStrategy.FIXED_X:
        return Basis.X
    if strategy is EveBasisStrategy.FIXED_Y:
        return Basis.Y
    return Basis.X if rng.random() < 0.5 else Basis.Y


def intercept_resend(pulse: QubitPulse, strategy: EveBasisStrategy, rng: np.random.Generator,
                     alice_basis: Optional[Basis] = None) -> Tuple[QubitPulse, EveRecord]:
    """Measure the pulse and resend a fresh single photon in the measured state.

    An empty pulse gives Eve nothing to measure and is forwarded as vacuum.
    """
    basis = _choose_basis(strategy, alice_basis, rng)
    if pulse.n == 0:
        return (QubitPulse(n=0, bloch=pulse.bloch, class_id=pulse.class_id, slot=pulse.slot),
                EveRecord(slot=pulse.slot, intercepted=True, basis=basis))
    axis = BASIS_AXES[basis]
    p0 = 0.5 * (1.0 + sum(r * a for r, a in zip(pulse.bloch, axis)))
    bit = 0 if rng.random() < p0 else 1
    forwarded = QubitPulse(n=1, bloch=bb84_bloch(basis, bit), class_id=pulse.class_id,
                           slot=pulse.slot)
    return forwarded, EveRecord(slot=pulse.slot, intercepted=True, basis=basis, bit=bit)


@registry.register
class InterceptResendAttack(Attack):
    """Intercept a fraction of the pulses, forward the rest through the honest channel."""

    kind = AttackKind.INTERCEPT_RESEND

    @property
    def supports_qubits(self) -> bool:
        return True

    def transform_qubit(self, pulse: QubitPulse, channel: ChannelModel, alice_basis: Optional[Basis],
                        channel_rng: np.random.Generator,
                        eve_rng: np.random.Generator) -> QubitPulse:
        if self.config.fraction < 1.0 and eve_rng.random() >= self.config.fraction:
            return channel_transmit(pulse, channel, channel_rng)
        forwarded, record = intercept_resend(pulse, self.config.strategy, eve_rng, alice_basis)
        self.records.append(record)
        # Eve's line is lossless; Bob's own optics still rotate the state.
        forwarded.bloch = rotate_z(forwarded.bloch, channel.misalignment_angle)
        return forwarded

    def describe(self) -> Dict[str, object]:
        return {
            "attack": self.kind.value,
            "fraction": self.config.fraction,
            "strategy": self.config.strategy.value,
            "intercepted": len(self.records),
        }
