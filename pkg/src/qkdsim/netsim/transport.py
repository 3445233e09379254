"""Hop-by-hop one-time-pad transport of secrets over trusted nodes."""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..errors import AuthenticationError, ConfigurationError, QKDSimError
from ..postproc.authentication import TAG_COST_BITS, AuthKeyPool, wc_tag, wc_verify
from .graph import TrustedNetwork
from .keystore import KeyStore, Reservation

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class SecretPayload:
    """Secret generated at the sending node."""

    data: bytes

    def __post_init__(self) -> None:
        if len(self.data) < 1:
            raise ConfigurationError("payload must hold at least one byte")

    @classmethod
    def from_rng(cls, rng: np.random.Generator, n_bytes: int) -> "SecretPayload":
        return cls(rng.integers(0, 256, size=n_bytes, dtype=np.uint8).tobytes())

    @property
    def n_bits(self) -> int:
        return 8 * len(self.data)


@dataclass(frozen=True)
class TransportMessage:
    """What travels on one link: OTP ciphertext, path header and its tag."""

    ciphertext: bytes
    tag: bytes
    remaining: Tuple[str, ...]
    payload_len: int

    def signed_bytes(self) -> bytes:
        header = "->".join(self.remaining).encode()
        return header + b"|" + self.payload_len.to_bytes(8, "big") + b"|" + self.ciphertext


Tamper = Callable[[int, TransportMessage], TransportMessage]


@dataclass
class DeliveryReport:
    """Outcome of one transport request."""

    request_id: str
    src: str
    dst: str
    outcome: str
    path: List[str] = field(default_factory=list)
    n_bytes: int = 0
    delivered: Optional[bytes] = None
    failed_hop: Optional[int] = None
    intact: bool = False
    consumption: Dict[str, int] = field(default_factory=dict)
    error: Optional[Dict[str, object]] = None

    @property
    def ok(self) -> bool:
        return self.outcome == "DELIVERED"

    def flat_record(self) -> Dict[str, object]:
        return {
            "request_id": self.request_id,
            "src": self.src,
            "dst": self.dst,
            "n_bytes": self.n_bytes,
            "path": "-".join(self.path),
            "outcome": self.outcome,
            "intact": self.intact,
            "failed_hop": "" if self.failed_hop is None else self.failed_hop,
            "consumption": ";".join(f"{k}={v}" for k, v in sorted(self.consumption.items())),
        }


def _xor(data: bytes, key_bits: np.ndarray) -> bytes:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return np.packbits(bits ^ key_bits).tobytes()


def _reserve_all(network: TrustedNetwork, path: List[str], n_bits: int,
                 ref: str) -> List[Tuple[str, Reservation, Reservation]]:
    held: List[Tuple[KeyStore, Reservation]] = []
    hops = []
    try:
        for u, v in zip(path, path[1:]):
            link_id = network.link_between(u, v).link_id
            pair = []
            for node in (u, v):
                store = network.store(link_id, node)
                reservation = store.reserve(n_bits, TAG_COST_BITS, ref)
                held.append((store, reservation))
                pair.append(reservation)
            hops.append((link_id, pair[0], pair[1]))
    except QKDSimError:
        for store, reservation in held:
            store.rollback(reservation)
        raise
    return hops


def hop_transport(payload: SecretPayload, path: List[str], network: TrustedNetwork,
                  request_id: str = "", tamper: Optional[Tamper] = None) -> DeliveryReport:
    """Relay ``payload`` along ``path``, re-encrypting at every trusted node.

    Every link on the path reserves ``|payload| + 128`` bits at both ends
    before anything is sent. At each hop the sender XORs the payload with
    the link key and tags the message; the receiver verifies the tag, then
    decrypts. Consumed key is zeroized on commit.

    On a tag mismatch the transport stops at that hop: key already exposed
    on that hop and earlier ones is burned, reservations further along are
    released, and the report carries ``AUTH_FAIL``.

    Raises:
        ConfigurationError: Path shorter than one hop or not a walk on the graph
        NoKeyError: Some link end cannot pay (nothing is reserved or spent)
    """
    if len(path) < 2:
        raise ConfigurationError("a transport path needs at least one hop")
    n_bits = payload.n_bits
    hops = _reserve_all(network, path, n_bits, request_id)
    report = DeliveryReport(request_id=request_id, src=path[0], dst=path[-1], outcome="DELIVERED",
                            path=list(path), n_bytes=len(payload.data))

    plaintext = payload.data
    for i, (link_id, res_u, res_v) in enumerate(hops):
        u, v = path[i], path[i + 1]
        store_u, store_v = network.store(link_id, u), network.store(link_id, v)
        network.observe(u, request_id, plaintext)

        otp_u, auth_u = store_u.read(res_u)
        sent = TransportMessage(ciphertext=_xor(plaintext, otp_u), tag=b"",
                                remaining=tuple(path[i + 1:]), payload_len=len(plaintext))
        sent = replace(sent, tag=wc_tag(sent.signed_bytes(), AuthKeyPool(auth_u)))
        received = sent if tamper is None else tamper(i, sent)
        network.tap(link_id, request_id, received.ciphertext)

        otp_v, auth_v = store_v.read(res_v)
        if not wc_verify(received.signed_bytes(), received.tag, AuthKeyPool(auth_v)):
            error = AuthenticationError(f"tag mismatch on hop {u}->{v}",
                                        details={"link": link_id, "hop": i})
            network.guard.record_failure(link_id, error)
            # hops before i were committed as they succeeded
            store_u.commit(res_u)
            store_v.commit(res_v)
            report.consumption[link_id] = n_bits + TAG_COST_BITS
            for j in range(i + 1, len(hops)):
                released_id, r_u, r_v = hops[j]
                network.store(released_id, path[j]).rollback(r_u)
                network.store(released_id, path[j + 1]).rollback(r_v)
            report.outcome, report.failed_hop, report.error = error.code, i, error.to_dict()
            logger.warning("transport_auth_fail", request=request_id, link=link_id, hop=i)
            return report

        plaintext = _xor(received.ciphertext, otp_v)
        store_u.commit(res_u)
        store_v.commit(res_v)
        network.guard.record_success(link_id)
        report.consumption[link_id] = n_bits + TAG_COST_BITS

    network.observe(path[-1], request_id, plaintext)
    report.delivered = plaintext
    report.intact = plaintext == payload.data
    logger.info("transport_delivered", request=request_id, path="-".join(path),
                bits=n_bits, intact=report.intact)
    return report

