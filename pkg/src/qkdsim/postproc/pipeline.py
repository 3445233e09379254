"""End-to-end distillation of sifted keys into secret keys."""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import structlog

from ..errors import SessionAbort
from ..models import Party, QberEstimate, SecurityParams
from .amplification import SecretKey, privacy_amplify, secret_length
from .authentication import TAG_COST_BITS, AuthenticatedChannel
from .cascade import cascade_reconcile
from .estimation import KeyPair, estimate_qber, split_test_bits
from .hashing import toeplitz_seed

logger = structlog.get_logger(__name__)

DISTILL_PHASES = ("estimation", "cascade", "verification", "amplification")


@dataclass
class DistillReport:
    """What one distillation disclosed, spent and produced."""

    n_sifted: int
    n_test: int
    n_code: int
    qber: QberEstimate
    leak_bits: int
    corrections: int
    passes: int
    secret_length: int
    e1_upper: float
    single_photon_fraction: float
    auth_bits_consumed: int
    refilled_bits: int
    keys_match: bool

    def flat_record(self) -> Dict[str, object]:
        return {
            "n_sifted": self.n_sifted,
            "n_test": self.n_test,
            "n_code": self.n_code,
            "qber": self.qber.point,
            "qber_ci_upper": self.qber.ci_upper,
            "leak_bits": self.leak_bits,
            "corrections": self.corrections,
            "cascade_passes": self.passes,
            "secret_length": self.secret_length,
            "e1_upper": self.e1_upper,
            "single_photon_fraction": self.single_photon_fraction,
            "auth_bits_consumed": self.auth_bits_consumed,
            "refilled_bits": self.refilled_bits,
            "keys_match": self.keys_match,
        }


def _disclose_test_bits(channel: AuthenticatedChannel, test: KeyPair) -> None:
    test_a, test_b = test
    channel.send(Party.BOB, "estimation",
                 test_b.slots.astype("<i8").tobytes() + np.packbits(test_b.bits).tobytes(),
                 disclosed_bits=len(test_b))
    channel.send(Party.ALICE, "estimation", np.packbits(test_a.bits).tobytes())


def distill(sifted: KeyPair, params: SecurityParams, channel: AuthenticatedChannel,
            rng: np.random.Generator, test_fraction: float = 0.1,
            e1_upper: Optional[float] = None, single_photon_fraction: float = 1.0,
            split: Optional[Tuple[KeyPair, KeyPair]] = None,
            refill_bits: int = 0) -> Tuple[SecretKey, SecretKey, DistillReport]:
    """Split, estimate, reconcile and amplify.

    The authentication cost of every phase is checked before the first bit is
    disclosed. Each phase transcript is sealed with a Wegman-Carter tag.

    Args:
        sifted: Aligned (Alice, Bob) sifted keys
        params: Security parameters
        channel: Authenticated classical channel
        rng: Public randomness (test sample, permutations, hash seeds)
        test_fraction: Fraction of sifted bits disclosed for testing
        e1_upper: Single-photon phase-error bound; the QBER upper bound when omitted
        single_photon_fraction: Fraction of code bits credited to single photons
        split: Precomputed (test, code) split of ``sifted``
        refill_bits: Bits of fresh key moved into the authentication pools

    Returns:
        (Alice's SecretKey, Bob's SecretKey, DistillReport)

    Raises:
        AuthPoolExhausted: The pools cannot pay for all phases
        SessionAbort: QBER upper bound at or above the abort threshold
        ReconcileFailure: Cascade verification failed
        AuthenticationError: A phase transcript was altered
    """
    channel.require(len(DISTILL_PHASES))
    consumed_before = channel.alice_pool.consumed
    test, code = split if split is not None else split_test_bits(sifted, test_fraction, rng)

    _disclose_test_bits(channel, test)
    qber = estimate_qber(test, params)
    channel.seal("estimation")
    if qber.abort:
        raise SessionAbort(
            f"QBER upper bound {qber.ci_upper:.4f} >= {params.abort_qber}",
            details={"qber": qber.point, "ci_upper": qber.ci_upper, "n_test": qber.n_test},
        )

    rec_a, rec_b = cascade_reconcile(code[0], code[1], qber, channel=channel, rng=rng,
                                     verify_bits=params.verify_hash_bits,
                                     failure_exponent=params.s)
    channel.seal("cascade")
    channel.seal("verification")

    e1 = qber.ci_upper if e1_upper is None else e1_upper
    n_code = len(rec_a.bits)
    out_len = secret_length(n_code, e1, rec_a.leak_bits, single_photon_fraction, params.s, params.l)
    seed = toeplitz_seed(rng, n_code, out_len)
    channel.send(Party.ALICE, "amplification", np.packbits(seed).tobytes())
    channel.seal("amplification")
    key_a = privacy_amplify(rec_a, e1, single_photon_fraction, params, seed_bits=seed)
    key_b = privacy_amplify(rec_b, e1, single_photon_fraction, params, seed_bits=seed)

    refilled = min(refill_bits, len(key_a))
    if refilled:
        channel.refill(key_a.bits[:refilled], key_b.bits[:refilled])
        key_a.bits, key_b.bits = key_a.bits[refilled:].copy(), key_b.bits[refilled:].copy()
        key_a.auth_refill = key_b.auth_refill = refilled

    report = DistillReport(
        n_sifted=len(sifted[0]),
        n_test=len(test[0]),
        n_code=n_code,
        qber=qber,
        leak_bits=rec_a.leak_bits,
        corrections=rec_b.corrections,
        passes=rec_a.passes,
        secret_length=len(key_a),
        e1_upper=e1,
        single_photon_fraction=single_photon_fraction,
        auth_bits_consumed=channel.alice_pool.consumed - consumed_before,
        refilled_bits=refilled,
        keys_match=bool(np.array_equal(key_a.bits, key_b.bits)),
    )
    logger.info("distill_complete", secret_length=report.secret_length, qber=qber.point,
                leak_bits=report.leak_bits, auth_bits=report.auth_bits_consumed)
    return key_a, key_b, report


def distill_cost_bits() -> int:
    """Authentication bits one call to :func:`distill` consumes."""
    return len(DISTILL_PHASES) * TAG_COST_BITS
