"""Classical post-processing: estimation, cascade, privacy amplification, authentication."""

from .amplification import SecretKey, privacy_amplify, secret_length
from .authentication import (
    MAC_BITS,
    TAG_COST_BITS,
    AuthenticatedChannel,
    AuthKeyPool,
    ClassicalMessage,
    forgery_bound,
    gf64_mul,
    wc_tag,
    wc_verify,
)
from .cascade import ReconciledKey, cascade_reconcile, initial_block_size
from .estimation import estimate_qber, split_test_bits
from .hashing import toeplitz_hash, toeplitz_seed
from .keyfile import metadata_digest, read_key_file, write_key_file
from .pipeline import DISTILL_PHASES, DistillReport, distill, distill_cost_bits

__all__ = [
    "DISTILL_PHASES",
    "MAC_BITS",
    "TAG_COST_BITS",
    "AuthKeyPool",
    "AuthenticatedChannel",
    "ClassicalMessage",
    "DistillReport",
    "ReconciledKey",
    "SecretKey",
    "cascade_reconcile",
    "distill",
    "distill_cost_bits",
    "estimate_qber",
    "forgery_bound",
    "gf64_mul",
    "initial_block_size",
    "metadata_digest",
    "privacy_amplify",
    "read_key_file",
    "secret_length",
    "split_test_bits",
    "toeplitz_hash",
    "toeplitz_seed",
    "wc_tag",
    "wc_verify",
    "write_key_file",
]
