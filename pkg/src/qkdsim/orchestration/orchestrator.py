"""Single-link session orchestrator: quantum phase, sifting, estimation and distillation."""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..attacks.analysis import eve_bit_accuracy
from ..attacks.base import Attack, build_attack
from ..errors import (
    AuthenticationError,
    BoundUnavailableError,
    EmptyTestSetError,
    MissingBoundsError,
    QKDSimError,
    SessionAbort,
    SyncFatal,
)
from ..models import (
    AttackConfig,
    Basis,
    ChannelModel,
    DecoyBounds,
    DetectorModel,
    FaultConfig,
    KeyRateEstimate,
    Party,
    PhotonStatistics,
    Protocol,
    RateMode,
    SecurityParams,
    SessionConfig,
    SessionStats,
    SyncConfig,
)
from ..monitoring.metrics import SimulationMetrics
from ..photonics.signals import DetectionRecord
from ..postproc.amplification import SecretKey
from ..postproc.authentication import AuthenticatedChannel, AuthKeyPool, ClassicalMessage
from ..postproc.estimation import KeyPair, split_test_bits
from ..postproc.pipeline import DISTILL_PHASES, DistillReport, distill
from ..protocols.records import Announcements, RawLog
from ..protocols.rates import estimate_rate
from ..protocols.session import run_quantum_phase
from ..protocols.sifting import announce, sift
from ..protocols.statistics import accumulate_stats
from ..randomness import SessionStreams, random_bits
from .synchronized import SyncSessionResult, run_synchronized_session

logger = structlog.get_logger(__name__)

# sifting and decoy disclosure come on top of the distillation phases
SESSION_PHASES = ("sifting", "disclosure") + DISTILL_PHASES

_BASIS_CODES = {None: 0, Basis.X: 1, Basis.Y: 2}

Tamper = Callable[[ClassicalMessage], bytes]


@dataclass
class SessionResult:
    """Everything one session produced.

    ``key_a``/``key_b`` are only set when ``outcome`` is ``"OK"``; an
    aborted session carries the error code and no key material.
    """

    seed: int
    protocol: Protocol
    outcome: str
    stats: Optional[SessionStats] = None
    rate: Optional[KeyRateEstimate] = None
    bounds: Optional[DecoyBounds] = None
    report: Optional[DistillReport] = None
    key_a: Optional[SecretKey] = None
    key_b: Optional[SecretKey] = None
    sync: Optional[SyncSessionResult] = None
    attack: Optional[Dict[str, object]] = None
    eve_accuracy: Optional[float] = None
    sifted_qber: Optional[float] = None
    error: Optional[Dict[str, object]] = None
    auth_pool: Optional[AuthKeyPool] = None

    @property
    def aborted(self) -> bool:
        return self.outcome != "OK"

    @property
    def secret_length(self) -> int:
        return 0 if self.key_a is None else len(self.key_a)

    def flat_record(self) -> Dict[str, object]:
        """One CSV row: outcome, statistics, rate and distillation columns."""
        record: Dict[str, object] = {
            "seed": self.seed,
            "protocol": self.protocol.value,
            "outcome": self.outcome,
            "secret_length": self.secret_length,
            "sifted_qber": "" if self.sifted_qber is None else self.sifted_qber,
        }
        if self.stats is not None:
            record.update(self.stats.flat_record())
        if self.rate is not None:
            record.update({
                "rate_mode": self.rate.mode.value,
                "rate": self.rate.rate,
                "rate_composable": self.rate.composable,
                "q1": self.rate.q1,
                "e1": self.rate.e1,
            })
        if self.bounds is not None:
            record.update({"y1_lower": self.bounds.y1_lower, "e1_upper_decoy": self.bounds.e1_upper})
        if self.report is not None:
            record.update(self.report.flat_record())
        if self.attack is not None:
            record.update({f"attack_{k}": v for k, v in self.attack.items()})
            record["eve_accuracy"] = "" if self.eve_accuracy is None else self.eve_accuracy
        if self.sync is not None:
            record.update({
                "sync_status": self.sync.state.status.value,
                "sync_offset": self.sync.state.offset,
                "recalibrations": self.sync.recalibrations,
            })
        if self.error is not None:
            record["error"] = self.error.get("message", "")
        return record


def default_rate_mode(cfg: SessionConfig) -> RateMode:
    """Rate bound matching the configured source."""
    if cfg.source.photon_statistics is PhotonStatistics.SINGLE_PHOTON:
        return RateMode.SINGLE_PHOTON
    if cfg.source.decoy_mode:
        return RateMode.DECOY
    return RateMode.WCP_WORSTCASE


def _encode_bases(bases: Sequence[Optional[Basis]]) -> bytes:
    return bytes(_BASIS_CODES[b] for b in bases)


def _announce_on(channel: AuthenticatedChannel, protocol: Protocol, ann: Announcements) -> None:
    channel.send(Party.BOB, "sifting", _encode_bases(ann.bob_bases))
    if protocol in (Protocol.BB84, Protocol.BB84_DECOY):
        channel.send(Party.ALICE, "sifting", _encode_bases(ann.alice_bases))
    if ann.alice_pairs is not None:
        channel.send(Party.ALICE, "sifting", np.asarray(ann.alice_pairs, dtype=np.uint8).tobytes())
    if ann.bob_conclusive is not None:
        channel.send(Party.BOB, "sifting", np.packbits(ann.bob_conclusive).tobytes())


def _split_classes(sifted: KeyPair, signal_class: str) -> Tuple[KeyPair, KeyPair]:
    key_a, key_b = sifted
    mask = np.array([c == signal_class for c in key_a.class_ids], dtype=bool)
    return (key_a.subset(mask), key_b.subset(mask)), (key_a.subset(~mask), key_b.subset(~mask))


def _disclose(channel: AuthenticatedChannel, pair: KeyPair) -> None:
    key_a, key_b = pair
    channel.send(Party.BOB, "disclosure",
                 key_b.slots.astype("<i8").tobytes() + np.packbits(key_b.bits).tobytes(),
                 disclosed_bits=len(key_b))
    channel.send(Party.ALICE, "disclosure", np.packbits(key_a.bits).tobytes())


class SessionOrchestrator:
    """Run complete point-to-point QKD sessions."""

    def __init__(self, params: Optional[SecurityParams] = None,
                 rate_mode: Optional[RateMode] = None,
                 metrics: Optional[SimulationMetrics] = None,
                 auth_bits: int = 4096, refill_bits: int = 0):
        """Initialize the orchestrator.

        Args:
            params: Security parameters for estimation and distillation
            rate_mode: Rate bound; chosen from the source when omitted
            metrics: Run metrics to record outcomes into
            auth_bits: Size of the pre-shared authentication secret
            refill_bits: Fresh key bits moved back into the authentication pools
        """
        self.params = params or SecurityParams()
        self.rate_mode = rate_mode
        self.metrics = metrics
        self.auth_bits = auth_bits
        self.refill_bits = refill_bits

    def run(self, cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
            attack_cfg: Optional[AttackConfig] = None, sync: Optional[SyncConfig] = None,
            fault: Optional[FaultConfig] = None, tamper: Optional[Tamper] = None,
            auth_secret: Optional[np.ndarray] = None) -> SessionResult:
        """Run one session end to end.

        The classical channel is authenticated from ``auth_secret`` (a link's
        bootstrap secret) or, when omitted, from ``auth_bits`` bits drawn from
        the post-processing stream.

        Aborts (QBER, authentication, missing bounds, FATAL sync) are returned
        as a result with the error code rather than raised; configuration
        errors propagate.
        """
        streams = SessionStreams.from_seed(cfg.seed)
        attack = build_attack(attack_cfg, cfg.source, channel, detector) if attack_cfg else None
        result = SessionResult(seed=cfg.seed, protocol=cfg.protocol, outcome="OK")

        try:
            alice, records = self._quantum_phase(cfg, channel, detector, attack, streams, sync,
                                                 fault, result)
            self._post_process(cfg, alice, records, streams, tamper, auth_secret, result)
        except (SessionAbort, AuthenticationError, EmptyTestSetError, BoundUnavailableError,
                MissingBoundsError) as e:
            self._abort(result, e)
        finally:
            if attack is not None:
                result.attack = attack.describe()
        self._record(result)
        return result

    def _quantum_phase(self, cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
                       attack: Optional[Attack], streams: SessionStreams,
                       sync: Optional[SyncConfig], fault: Optional[FaultConfig],
                       result: SessionResult) -> Tuple[RawLog, List[DetectionRecord]]:
        if sync is None and fault is None:
            alice, records = run_quantum_phase(cfg, channel, detector, attack, streams)
        else:
            result.sync = run_synchronized_session(cfg, channel, detector, sync, fault, attack)
            if result.sync.fatal:
                raise _fatal(result.sync)
            alice, records = result.sync.alice, result.sync.aligned_records
        if attack is not None:
            result.eve_accuracy = eve_bit_accuracy(attack.records, alice.bits, alice.bases)
        return alice, records

    def _post_process(self, cfg: SessionConfig, alice: RawLog, records: List[DetectionRecord],
                      streams: SessionStreams, tamper: Optional[Tamper],
                      auth_secret: Optional[np.ndarray], result: SessionResult) -> None:
        if auth_secret is None:
            auth_secret = random_bits(streams.post, self.auth_bits)
        channel = AuthenticatedChannel.from_secret(auth_secret)
        channel.tamper = tamper
        result.auth_pool = channel.alice_pool
        channel.require(len(SESSION_PHASES))

        ann = announce(cfg.protocol, alice, records)
        _announce_on(channel, cfg.protocol, ann)
        channel.seal("sifting")
        sifted = sift(cfg.protocol, alice, records, ann)
        if len(sifted[0]):
            result.sifted_qber = float(np.mean(sifted[0].bits != sifted[1].bits))

        signal, decoys = _split_classes(sifted, cfg.source.signal_class)
        split = split_test_bits(signal, cfg.test_fraction, streams.post)
        _disclose(channel, decoys)
        channel.seal("disclosure")

        disclosed = np.concatenate([split[0][0].slots, decoys[0].slots])
        result.stats = accumulate_stats(alice, records, sifted, disclosed, cfg.source,
                                        cfg.basis_bias)
        mode = self.rate_mode or default_rate_mode(cfg)
        result.rate, result.bounds = estimate_rate(result.stats, mode, self.params)

        e1_upper: Optional[float] = None
        fraction = 1.0
        if result.rate.composable and mode is not RateMode.SINGLE_PHOTON:
            gain = result.stats.gain()
            fraction = min(1.0, result.rate.q1 / gain) if gain > 0 else 0.0
            e1_upper = result.rate.e1

        key_a, key_b, report = distill(signal, self.params, channel, streams.post,
                                       test_fraction=cfg.test_fraction, e1_upper=e1_upper,
                                       single_photon_fraction=fraction, split=split,
                                       refill_bits=self.refill_bits)
        result.key_a, result.key_b, result.report = key_a, key_b, report
        logger.info("session_complete", protocol=cfg.protocol.value, seed=cfg.seed,
                    secret_length=len(key_a), qber=report.qber.point, rate=result.rate.rate)

    def _abort(self, result: SessionResult, error: QKDSimError) -> None:
        for key in (result.key_a, result.key_b):
            if key is not None:
                key.zeroize()
        result.key_a = result.key_b = None
        result.outcome = error.code
        result.error = error.to_dict()
        logger.warning("session_aborted", protocol=result.protocol.value, seed=result.seed,
                       code=error.code, reason=error.message)

    def _record(self, result: SessionResult) -> None:
        if self.metrics is None:
            return
        qber = None if result.report is None else result.report.qber.point
        self.metrics.record_session(result.protocol.value, result.outcome, result.secret_length,
                                    qber)
        if result.sync is not None:
            for transition in result.sync.transitions:
                if transition.after is not transition.before:
                    self.metrics.record_transition(transition.after.value)


def _fatal(sync: SyncSessionResult) -> SyncFatal:
    return SyncFatal("frame synchronization lost and not recovered",
                     details={"windows": len(sync.qber_series), "offset": sync.state.offset})
