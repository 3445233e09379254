"""Unambiguous state discrimination and the sequential attack on coherent signals."""

import math
from typing import Dict, List, Tuple

import numpy as np

from ..models import AttackConfig, AttackKind, ChannelModel, DetectorModel, SourceConfig
from ..photonics.signals import CoherentTrain
from .base import Attack, EveRecord, registry


def usd_success_probability(mu: float) -> float:
    """1 - |<alpha|-alpha>| for two coherent states of mean photon number mu."""
    return 1.0 - math.exp(-2.0 * mu)


def kept_fraction(mu: float, block_len: int) -> float:
    """Long-run share of slots inside USD success runs of at least ``block_len``.

    With per-pulse success p a slot sits in a run of length m in m ways, so the
    share is (1 - p)^2 * sum_{m >= L} m p^m = p^L (L - (L - 1) p).
    """
    p = usd_success_probability(mu)
    return p ** block_len * (block_len - (block_len - 1) * p)


def matched_resend_scale(mu: float, block_len: int, transmittance: float) -> float:
    """Amplitude factor that gives Bob the honest mean intensity mu * eta."""
    kept = kept_fraction(mu, block_len)
    if kept <= 0.0:
        return 0.0
    return math.sqrt(transmittance / kept)


def usd_sequential(signal: CoherentTrain, mu: float, block_len: int, rng: np.random.Generator,
                   resend_scale: float = 1.0) -> Tuple[CoherentTrain, List[EveRecord]]:
    """USD on every pulse of a +/-alpha train; resend only runs of successes.

    Runs of at least ``block_len`` consecutive successes are resent as clean
    coherent pulses with the identified phases (scaled by ``resend_scale``);
    every other slot is suppressed to vacuum.
    """
    n = len(signal)
    success = rng.random(n) < usd_success_probability(mu)
    phases = np.where(signal.amps.real >= 0.0, 0, 1)
    keep = np.zeros(n, dtype=bool)
    start = None
    for k in range(n + 1):
        if k < n and success[k]:
            if start is None:
                start = k
            continue
        if start is not None and k - start >= block_len:
            keep[start:k] = True
        start = None
    amplitude = math.sqrt(mu) * resend_scale
    amps = np.where(keep, np.where(phases == 0, amplitude, -amplitude), 0.0).astype(complex)
    records = [
        EveRecord(slot=k, intercepted=True, usd_success=bool(success[k]),
                  bit=int(phases[k]) if success[k] else None)
        for k in range(n)
    ]
    return CoherentTrain(amps=amps, global_phase_randomized=False), records


@registry.register
class UsdSequentialAttack(Attack):
    """Sequential USD attack for DPS trains and B92 signal/reference pairs."""

    kind = AttackKind.USD_SEQUENTIAL

    def __init__(self, config: AttackConfig, mu: float):
        super().__init__(config)
        self.mu = mu

    @classmethod
    def from_link(cls, config: AttackConfig, source: SourceConfig, channel: ChannelModel,
                  detector: DetectorModel) -> "UsdSequentialAttack":
        mu = config.target_mu if config.target_mu is not None else source.mu(source.signal_class)
        return cls(config, mu)

    @property
    def supports_coherent(self) -> bool:
        return True

    def transform_train(self, train: CoherentTrain, channel: ChannelModel,
                        eve_rng: np.random.Generator) -> CoherentTrain:
        """Replace the channel; resent runs are dimmed so Bob sees the honest click rate."""
        scale = matched_resend_scale(self.mu, self.config.block_len, channel.transmittance)
        forwarded, records = usd_sequential(train, self.mu, self.config.block_len, eve_rng,
                                            resend_scale=scale)
        self.records.extend(records)
        return forwarded

    def transform_two_mode(self, train: CoherentTrain, channel: ChannelModel, slot: int,
                           eve_rng: np.random.Generator) -> CoherentTrain:
        """Resend the identified pair at honest post-channel intensity, else vacuum."""
        signal, reference = train.amps
        mu = abs(signal) ** 2
        success = bool(eve_rng.random() < usd_success_probability(mu))
        bit = 0 if signal.real >= 0.0 else 1
        self.records.append(EveRecord(slot=slot, intercepted=True, usd_success=success,
                                      bit=bit if success else None))
        if not success:
            return CoherentTrain(amps=np.zeros(2, dtype=complex))
        scale = math.sqrt(channel.transmittance)
        alpha = math.sqrt(mu) * (1.0 if bit == 0 else -1.0)
        return CoherentTrain(amps=np.array([alpha * scale, reference * scale], dtype=complex))

    @property
    def success_rate(self) -> float:
        """Empirical per-pulse USD success rate."""
        if not self.records:
            return 0.0
        return sum(1 for r in self.records if r.usd_success) / len(self.records)

    def describe(self) -> Dict[str, object]:
        return {
            "attack": self.kind.value,
            "mu": self.mu,
            "block_len": self.config.block_len,
            "usd_success_rate": self.success_rate,
        }
