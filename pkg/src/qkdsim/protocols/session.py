"""Quantum-phase drivers for BB84 (with and without decoys), SARG04, B92 and DPS."""

from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..attacks.base import Attack
from ..errors import ProtocolMismatchError
from ..models import Basis, ChannelModel, DetectorModel, Protocol, SessionConfig
from ..photonics.channel import channel_transmit, channel_transmit_train
from ..photonics.detectors import detect_outputs, measure_qubit
from ..photonics.interferometers import B92Receiver, b92_measure, interfere_train
from ..photonics.signals import (
    BASIS_AXES,
    CoherentTrain,
    DetectionRecord,
    DetectorHistory,
    QubitPulse,
    bb84_bloch,
)
from ..photonics.sources import emit_phase_train, emit_two_mode, sample_photon_numbers
from ..randomness import SessionStreams
from ..syncctl.drift import apply_drift, drift_profile
from .encoders import basis_of, sarg04_state
from .records import RawLog

logger = structlog.get_logger(__name__)


def _check_compatible(cfg: SessionConfig, attack: Optional[Attack]) -> None:
    if attack is None:
        return
    if cfg.protocol.is_qubit and not attack.supports_qubits:
        raise ProtocolMismatchError(
            f"{attack.kind.value} cannot attack the qubit protocol {cfg.protocol.value}"
        )
    if not cfg.protocol.is_qubit and not attack.supports_coherent:
        raise ProtocolMismatchError(
            f"{attack.kind.value} cannot attack the coherent-state protocol {cfg.protocol.value}"
        )


def _draw_classes(cfg: SessionConfig, rng: np.random.Generator) -> List[str]:
    ids = sorted(cfg.class_probabilities)
    probs = np.array([cfg.class_probabilities[c] for c in ids])
    picks = rng.choice(len(ids), size=cfg.n_pulses, p=probs / probs.sum())
    return [ids[i] for i in picks]


def _run_qubit(cfg: SessionConfig, channel: ChannelModel, detectors: DetectorModel,
               attack: Optional[Attack], streams: SessionStreams) -> Tuple[RawLog, List[DetectionRecord]]:
    n = cfg.n_pulses
    alice = streams.alice
    class_ids = _draw_classes(cfg, alice)
    bits = alice.integers(0, 2, size=n, dtype=np.uint8)
    pair_ids = None
    if cfg.protocol is Protocol.SARG04:
        pair_ids = alice.integers(0, 4, size=n)
        states = [sarg04_state(int(p), int(b)) for p, b in zip(pair_ids, bits)]
        bases: List[Optional[Basis]] = [basis_of(s) for s in states]
    else:
        x_mask = alice.random(n) < cfg.basis_bias
        bases = [Basis.X if x else Basis.Y for x in x_mask]
        states = [bb84_bloch(b, int(bit)) for b, bit in zip(bases, bits)]
    photons = sample_photon_numbers(cfg.source, class_ids, alice)

    bob_x = streams.bob.random(n) < cfg.basis_bias
    history = DetectorHistory()
    records: List[DetectionRecord] = []
    drifting = channel.drift is not None
    for k in range(n):
        pulse = QubitPulse(n=int(photons[k]), bloch=states[k], class_id=class_ids[k], slot=k)
        ch = apply_drift(channel, k) if drifting else channel
        if attack is not None:
            pulse = attack.transform_qubit(pulse, ch, bases[k], streams.channel, streams.eve)
        else:
            pulse = channel_transmit(pulse, ch, streams.channel)
        bob_basis = Basis.X if bob_x[k] else Basis.Y
        records.append(measure_qubit(pulse, BASIS_AXES[bob_basis], detectors, history,
                                     streams.bob, basis=bob_basis))
    log = RawLog(protocol=cfg.protocol, bits=bits, class_ids=class_ids, bases=bases,
                 pair_ids=pair_ids)
    return log, records


def _run_dps(cfg: SessionConfig, channel: ChannelModel, detectors: DetectorModel,
             attack: Optional[Attack], streams: SessionStreams) -> Tuple[RawLog, List[DetectionRecord]]:
    n = cfg.n_pulses
    signal_class = cfg.source.signal_class
    phases = streams.alice.integers(0, 2, size=n + 1, dtype=np.uint8)
    bits = phases[:-1] ^ phases[1:]
    train = emit_phase_train(cfg.source.mu(signal_class), phases)
    etas, angles = drift_profile(channel, n + 1)
    if attack is not None:
        received = attack.transform_train(train, channel, streams.eve)
    elif channel.drift is None:
        received = channel_transmit_train(train, channel)
    else:
        received = CoherentTrain(amps=train.amps * np.sqrt(etas))
    a0, a1 = interfere_train(received, delay=1, phase_offset=angles[1:])
    history = DetectorHistory()
    records = [
        detect_outputs(float(abs(a0[k]) ** 2), float(abs(a1[k]) ** 2), detectors, k, history,
                       streams.bob)
        for k in range(n)
    ]
    log = RawLog(protocol=cfg.protocol, bits=bits, class_ids=[signal_class] * n, phases=phases)
    return log, records


def _run_b92(cfg: SessionConfig, channel: ChannelModel, detectors: DetectorModel,
             attack: Optional[Attack], streams: SessionStreams) -> Tuple[RawLog, List[DetectionRecord]]:
    n = cfg.n_pulses
    signal_class = cfg.source.signal_class
    mu = cfg.source.mu(signal_class)
    bits = streams.alice.integers(0, 2, size=n, dtype=np.uint8)
    receiver = B92Receiver.from_config(cfg.b92, mu, detectors, channel.transmittance,
                                       channel.misalignment_angle)
    history = DetectorHistory()
    records: List[DetectionRecord] = []
    drifting = channel.drift is not None
    for k in range(n):
        pair = emit_two_mode(mu, cfg.b92.reference_mu, int(bits[k]))
        ch = apply_drift(channel, k) if drifting else channel
        if attack is not None:
            pair = attack.transform_two_mode(pair, ch, k, streams.eve)
        else:
            pair = channel_transmit_train(pair, ch)
        rx = receiver
        if drifting:
            rx = B92Receiver(split=receiver.split, window=receiver.window, detector=detectors,
                             phase_offset=ch.misalignment_angle)
        records.append(b92_measure(pair, rx, streams.bob, slot=k, history=history))
    log = RawLog(protocol=cfg.protocol, bits=bits, class_ids=[signal_class] * n)
    return log, records


def run_quantum_phase(cfg: SessionConfig, channel: ChannelModel, detectors: DetectorModel,
                      attack: Optional[Attack] = None,
                      streams: Optional[SessionStreams] = None) -> Tuple[RawLog, List[DetectionRecord]]:
    """Transmit ``cfg.n_pulses`` slots and record Bob's detections.

    Args:
        cfg: Session configuration (protocol, classes, seed)
        channel: Honest channel model
        detectors: Bob's detector pair
        attack: Optional adversary replacing the channel
        streams: Randomness; derived from ``cfg.seed`` when omitted

    Returns:
        (Alice's raw log, one DetectionRecord per slot)

    Raises:
        ProtocolMismatchError: Attack cannot act on the protocol's signal model
    """
    _check_compatible(cfg, attack)
    streams = streams or SessionStreams.from_seed(cfg.seed)
    if cfg.protocol.is_qubit:
        log, records = _run_qubit(cfg, channel, detectors, attack, streams)
    elif cfg.protocol is Protocol.DPS:
        log, records = _run_dps(cfg, channel, detectors, attack, streams)
    else:
        log, records = _run_b92(cfg, channel, detectors, attack, streams)
    logger.debug(
        "quantum_phase_complete",
        protocol=cfg.protocol.value,
        n_pulses=cfg.n_pulses,
        clicks=sum(1 for r in records if r.clicked),
        attack=None if attack is None else attack.kind.value,
    )
    return log, records
