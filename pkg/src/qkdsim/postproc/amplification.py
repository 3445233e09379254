"""Privacy amplification by Toeplitz hashing."""

import math
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..bounds import binary_entropy
from ..models import Party, SecurityParams
from .cascade import ReconciledKey
from .hashing import toeplitz_hash, toeplitz_seed


def secret_length(n: int, e1_upper: float, leak_bits: int, single_photon_fraction: float,
                  s: int, l: int) -> int:
    """floor(n A (1 - h2(e1)) - leak - 2l - s), never negative."""
    raw = n * single_photon_fraction * (1.0 - binary_entropy(e1_upper)) - leak_bits - 2 * l - s
    return max(0, math.floor(raw + 1e-9))


@dataclass
class SecretKey:
    """Distilled key with everything needed to recompute its length."""

    bits: np.ndarray
    owner: Party
    n_reconciled: int
    leak_bits: int
    e1_upper: float
    single_photon_fraction: float
    s: int
    l: int
    auth_refill: int = 0

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def epsilon_meta(self) -> Dict[str, object]:
        return {
            "n_reconciled": self.n_reconciled,
            "leak_bits": self.leak_bits,
            "e1_upper": self.e1_upper,
            "single_photon_fraction": self.single_photon_fraction,
            "s": self.s,
            "l": self.l,
            "auth_refill": self.auth_refill,
            "length": len(self.bits),
        }

    def formula_length(self) -> int:
        """Hashed length before any bits were moved to the authentication pool."""
        return secret_length(self.n_reconciled, self.e1_upper, self.leak_bits,
                             self.single_photon_fraction, self.s, self.l)

    def zeroize(self) -> None:
        self.bits[:] = 0


def privacy_amplify(key: ReconciledKey, e1_upper: float, single_photon_fraction: float,
                    params: SecurityParams, rng: Optional[np.random.Generator] = None,
                    seed_bits: Optional[np.ndarray] = None) -> SecretKey:
    """Compress a reconciled key to its secure length.

    Both parties must hash with the same public seed: pass it as
    ``seed_bits``, or the same-state ``rng`` on both sides.

    Args:
        key: Verified reconciled key
        e1_upper: Upper bound on the single-photon phase error
        single_photon_fraction: Fraction A of code bits attributable to single photons
        params: Security parameters (s, l)
        rng: Source of the Toeplitz seed when ``seed_bits`` is omitted
        seed_bits: Explicit Toeplitz seed

    Raises:
        ValueError: Neither ``rng`` nor ``seed_bits`` given
    """
    n = len(key.bits)
    out_len = secret_length(n, e1_upper, key.leak_bits, single_photon_fraction,
                            params.s, params.l)
    if seed_bits is None:
        if rng is None:
            raise ValueError("privacy_amplify needs rng or seed_bits")
        seed_bits = toeplitz_seed(rng, n, out_len)
    bits = toeplitz_hash(key.bits, seed_bits, out_len)
    return SecretKey(bits=bits, owner=key.owner, n_reconciled=n, leak_bits=key.leak_bits,
                     e1_upper=e1_upper, single_photon_fraction=single_photon_fraction,
                     s=params.s, l=params.l)
