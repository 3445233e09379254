"""Passive optical switching: one Alice, a beam splitter and two Bobs."""

from dataclasses import replace
from typing import List, Sequence, Tuple

import numpy as np
import structlog

from ..errors import ConfigurationError, ProtocolMismatchError
from ..models import ChannelModel, DetectorModel, Outcome, SessionConfig
from ..photonics.signals import DetectionRecord
from ..postproc.estimation import KeyPair
from ..protocols.session import run_quantum_phase
from ..protocols.sifting import sift
from ..randomness import SessionStreams, derive_seed

logger = structlog.get_logger(__name__)


def _routed(records: List[DetectionRecord], mask: np.ndarray) -> List[DetectionRecord]:
    return [r if keep else DetectionRecord(slot=r.slot, basis_used=r.basis_used,
                                           outcome=Outcome.NONE)
            for r, keep in zip(records, mask)]


def passive_switch_session(cfg: SessionConfig, detectors: Sequence[DetectorModel], ratio: float,
                           channel: ChannelModel) -> Tuple[KeyPair, KeyPair]:
    """Share one transmission between two receivers behind a splitter.

    Each pulse reaches the first receiver with probability ``ratio`` and the
    second otherwise. Both receivers choose bases independently and sift
    against Alice on their own, so the two keys never share a slot. A
    receiver's detectors are only read in the slots routed to it.

    Returns:
        ((Alice, Bob1) sifted keys, (Alice, Bob2) sifted keys)

    Raises:
        ConfigurationError: ratio outside [0, 1] or not two detector models
        ProtocolMismatchError: Protocol is not a qubit protocol
    """
    if not 0.0 <= ratio <= 1.0:
        raise ConfigurationError(f"splitter ratio must lie in [0, 1], got {ratio}")
    if len(detectors) != 2:
        raise ConfigurationError("a passive switch serves exactly two receivers")
    if not cfg.protocol.is_qubit:
        raise ProtocolMismatchError(f"passive switching is modelled for qubit protocols, "
                                    f"not {cfg.protocol.value}")

    streams = SessionStreams.from_seed(cfg.seed)
    second = SessionStreams.from_seed(derive_seed(cfg.seed, 2))
    to_first = np.random.default_rng(derive_seed(cfg.seed, 3)).random(cfg.n_pulses) < ratio

    alice, records_1 = run_quantum_phase(cfg, channel, detectors[0], None, streams)
    replay = replace(SessionStreams.from_seed(cfg.seed), channel=second.channel, bob=second.bob)
    _, records_2 = run_quantum_phase(cfg, channel, detectors[1], None, replay)

    pair_1 = sift(cfg.protocol, alice, _routed(records_1, to_first))
    pair_2 = sift(cfg.protocol, alice, _routed(records_2, ~to_first))
    logger.info("passive_switch_complete", ratio=ratio, routed_first=int(to_first.sum()),
                sifted_first=len(pair_1[0]), sifted_second=len(pair_2[0]))
    return pair_1, pair_2
