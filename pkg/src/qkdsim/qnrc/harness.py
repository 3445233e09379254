"""Monte-Carlo harness: Bob's error rate against a keyless heterodyne observer."""

from typing import Dict, Optional

import numpy as np
import structlog
from pydantic import BaseModel, Field

from ..models import Y00Config
from ..randomness import SessionStreams
from .adversary import (
    eve_known_plaintext,
    eve_nearest_block,
    masking_count,
    masking_count_empirical,
)
from .cipher import (
    decrypt_block,
    encrypt_block,
    heterodyne_block,
    homodyne_block,
    receiver_angles,
    transmit_block,
)
from .keystream import RunningKeyGen, expand_running_key

logger = structlog.get_logger(__name__)


class QnrcReport(BaseModel):
    """Measured error rates of one Y00 run."""
    n_symbols: int = Field(ge=1)
    M: int
    received_amplitude: float
    bob_ber: float = Field(ge=0.0, le=1.0)
    eve_symbol_error_ciphertext_only: float = Field(ge=0.0, le=1.0)
    eve_symbol_error_known_plaintext: float = Field(ge=0.0, le=1.0)
    eve_bit_error: float = Field(ge=0.0, le=1.0)
    masking_count: int
    masking_count_mc: int
    lfsr_primitive: bool

    def flat_record(self) -> Dict[str, object]:
        return self.model_dump()


def run_qnrc(cfg: Y00Config, n_symbols: int, seed: int,
             seed_key: Optional[int] = None) -> QnrcReport:
    """Encrypt random plaintext, decrypt at Bob, and attack with heterodyne detection.

    Eve samples the same post-channel field as Bob. ``seed_key`` defaults to
    a non-zero value drawn from Alice's stream.
    """
    streams = SessionStreams.from_seed(seed)
    if seed_key is None:
        seed_key = int(streams.alice.integers(1, 2 ** cfg.lfsr_degree))
    alice_gen = RunningKeyGen(seed_key, cfg.tap_exponents, cfg.M)
    z = expand_running_key(alice_gen, n_symbols)
    bob_z = expand_running_key(RunningKeyGen(seed_key, cfg.tap_exponents, cfg.M), n_symbols)
    x = streams.alice.integers(0, 2, size=n_symbols, dtype=np.uint8)

    received = transmit_block(encrypt_block(x, z, cfg), cfg)
    values = homodyne_block(received, receiver_angles(bob_z, cfg), streams.bob, cfg.excess_noise)
    bob_bits = decrypt_block(values, bob_z, cfg)

    p, q = heterodyne_block(received, streams.eve, cfg.excess_noise)
    x_hat, z_hat = eve_nearest_block(p, q, cfg)
    z_known = eve_known_plaintext(p, q, x, cfg)
    k_true = z + ((x.astype(np.int64) ^ (z & 1)) * cfg.M)
    k_hat = z_hat + ((x_hat.astype(np.int64) ^ (z_hat & 1)) * cfg.M)

    report = QnrcReport(
        n_symbols=n_symbols,
        M=cfg.M,
        received_amplitude=cfg.received_amplitude,
        bob_ber=float(np.mean(bob_bits != x)),
        eve_symbol_error_ciphertext_only=float(np.mean(z_hat != z)),
        eve_symbol_error_known_plaintext=float(np.mean(z_known != z)),
        eve_bit_error=float(np.mean(x_hat != x)),
        masking_count=masking_count(cfg),
        masking_count_mc=masking_count_empirical(k_hat - k_true, cfg),
        lfsr_primitive=alice_gen.primitive,
    )
    logger.info("qnrc_complete", M=cfg.M, bob_ber=report.bob_ber,
                eve_symbol_error=report.eve_symbol_error_ciphertext_only)
    return report
