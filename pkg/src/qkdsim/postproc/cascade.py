"""Cascade error reconciliation with a shared parity cache."""

import math
from collections import deque
from dataclasses import dataclass
from typing import Deque, Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..errors import ConfigurationError, ReconcileFailure
from ..models import Party, QberEstimate
from ..protocols.records import SiftedKey
from .authentication import AuthenticatedChannel
from .hashing import toeplitz_hash, toeplitz_seed

logger = structlog.get_logger(__name__)

BlockKey = Tuple[int, int, int]

MIN_PASSES = 2
MAX_PASSES = 8
MIN_QBER_FOR_SIZING = 1e-3


@dataclass
class ReconciledKey:
    """Output of cascade for one party."""

    bits: np.ndarray
    owner: Party
    leak_bits: int
    verified: bool
    corrections: int = 0
    parity_bits: int = 0
    hash_bits: int = 0
    passes: int = 0


def initial_block_size(qber: float, n: int) -> int:
    """ceil(1 / QBER), capped at the key length."""
    return max(1, min(n, math.ceil(1.0 / max(qber, MIN_QBER_FOR_SIZING))))


def verification_width(failure_exponent: int, max_passes: int = MAX_PASSES) -> int:
    """Hash bits keeping the chance that any of ``max_passes`` checks misses below 2^-s."""
    return failure_exponent + math.ceil(math.log2(max(2, max_passes)))


class _CascadeRun:
    """State of one reconciliation: Bob's working copy, pass permutations, Alice's parities."""

    def __init__(self, alice: np.ndarray, bob: np.ndarray, k1: int, rng: np.random.Generator):
        self.alice = alice
        self.bob = bob.copy()
        self.n = len(alice)
        self.k1 = k1
        self.rng = rng
        self.perms: List[np.ndarray] = []
        self.positions: List[np.ndarray] = []
        self.sizes: List[int] = []
        self.alice_parity: Dict[BlockKey, int] = {}
        self.disclosed: List[int] = []
        self.corrections = 0

    def _bob_parity(self, p: int, lo: int, hi: int) -> int:
        return int(self.bob[self.perms[p][lo:hi]].sum() & 1)

    def _ask(self, key: BlockKey) -> int:
        """Alice's parity of a sub-block, disclosed once and cached."""
        if key not in self.alice_parity:
            p, lo, hi = key
            parity = int(self.alice[self.perms[p][lo:hi]].sum() & 1)
            self.alice_parity[key] = parity
            self.disclosed.append(parity)
        return self.alice_parity[key]

    def _block_of(self, p: int, index: int) -> BlockKey:
        k = self.sizes[p]
        lo = (int(self.positions[p][index]) // k) * k
        return p, lo, min(self.n, lo + k)

    def _bisect(self, key: BlockKey) -> int:
        p, lo, hi = key
        parity = self._ask(key)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            left = self._ask((p, lo, mid))
            # the right half's parity follows from the block and left parities
            self.alice_parity.setdefault((p, mid, hi), parity ^ left)
            if left != self._bob_parity(p, lo, mid):
                hi, parity = mid, left
            else:
                lo, parity = mid, parity ^ left
        return int(self.perms[p][lo])

    def add_pass(self) -> int:
        p = len(self.perms)
        perm = np.arange(self.n) if p == 0 else self.rng.permutation(self.n)
        positions = np.empty(self.n, dtype=np.int64)
        positions[perm] = np.arange(self.n)
        self.perms.append(perm)
        self.positions.append(positions)
        self.sizes.append(min(self.n, self.k1 * 2 ** p))
        return p

    def run_pass(self, p: int) -> int:
        """Correct every odd block of pass ``p``; returns the number of flipped bits."""
        before = self.corrections
        k = self.sizes[p]
        queue: Deque[BlockKey] = deque()
        for lo in range(0, self.n, k):
            key = (p, lo, min(self.n, lo + k))
            if self._ask(key) != self._bob_parity(*key):
                queue.append(key)
        while queue:
            key = queue.popleft()
            if self.alice_parity[key] == self._bob_parity(*key):
                continue
            index = self._bisect(key)
            self.bob[index] ^= 1
            self.corrections += 1
            for earlier in range(p + 1):
                block = self._block_of(earlier, index)
                if block in self.alice_parity and \
                        self.alice_parity[block] != self._bob_parity(*block):
                    queue.append(block)
        return self.corrections - before


def cascade_reconcile(code_a: SiftedKey, code_b: SiftedKey, qber_est: QberEstimate,
                      channel: Optional[AuthenticatedChannel] = None,
                      rng: Optional[np.random.Generator] = None,
                      min_passes: int = MIN_PASSES, max_passes: int = MAX_PASSES,
                      verify_bits: Optional[int] = None,
                      failure_exponent: int = 10) -> Tuple[ReconciledKey, ReconciledKey]:
    """Reconcile Bob's code bits to Alice's.

    Pass 0 uses the natural order with blocks of ceil(1/QBER) bits; later
    passes use fresh public permutations and double the block size. Each
    corrected bit re-opens the blocks of earlier passes that contain it.
    Once ``min_passes`` passes have run, a pass that corrects nothing ends
    the passes and a random hash of Alice's key is compared. On mismatch
    further passes run until ``max_passes``, the last one always checked.

    Args:
        code_a: Alice's code bits
        code_b: Bob's code bits
        qber_est: Test-bit estimate used for block sizing
        channel: Authenticated channel carrying the parities and the hash
        rng: Public randomness for permutations and the verification hash
        min_passes: Passes before the first verification
        max_passes: Passes before giving up
        verify_bits: Width of the verification hash, derived from
            ``failure_exponent`` when omitted
        failure_exponent: s in the 2^-s bound on accepting unequal keys

    Raises:
        ConfigurationError: Keys of unequal length
        ReconcileFailure: Hash still differs after ``max_passes``
    """
    if len(code_a) != len(code_b):
        raise ConfigurationError(
            f"cascade needs equal lengths, got {len(code_a)} and {len(code_b)}"
        )
    rng = rng or np.random.default_rng(0)
    n = len(code_a)
    if n == 0:
        empty = np.zeros(0, dtype=np.uint8)
        return (ReconciledKey(empty, Party.ALICE, 0, True),
                ReconciledKey(empty.copy(), Party.BOB, 0, True))

    if verify_bits is None:
        verify_bits = verification_width(failure_exponent, max_passes)
    run = _CascadeRun(code_a.bits, code_b.bits, initial_block_size(qber_est.point, n), rng)
    hash_bits = 0
    verified = False
    while len(run.perms) < max_passes:
        already = len(run.disclosed)
        p = run.add_pass()
        flipped = run.run_pass(p)
        if channel is not None:
            new = np.array(run.disclosed[already:], dtype=np.uint8)
            channel.send(Party.ALICE, "cascade", np.packbits(new).tobytes(), disclosed_bits=len(new))
        last = len(run.perms) == max_passes
        if not last and (len(run.perms) < min_passes or flipped):
            continue
        seed = toeplitz_seed(rng, n, verify_bits)
        alice_hash = toeplitz_hash(run.alice, seed, verify_bits)
        hash_bits += verify_bits
        if channel is not None:
            channel.send(Party.ALICE, "verification", np.packbits(alice_hash).tobytes(),
                         disclosed_bits=verify_bits)
        if np.array_equal(alice_hash, toeplitz_hash(run.bob, seed, verify_bits)):
            verified = True
            break

    leak = len(run.disclosed) + hash_bits
    logger.debug("cascade_complete", n=n, passes=len(run.perms), corrections=run.corrections,
                 leak_bits=leak, verified=verified)
    if not verified:
        raise ReconcileFailure(
            f"verification hash differs after {len(run.perms)} passes",
            details={"passes": len(run.perms), "leak_bits": leak},
        )

    def reconciled(bits: np.ndarray, owner: Party) -> ReconciledKey:
        return ReconciledKey(bits=bits, owner=owner, leak_bits=leak, verified=True,
                             corrections=run.corrections, parity_bits=len(run.disclosed),
                             hash_bits=hash_bits, passes=len(run.perms))

    return reconciled(code_a.bits.copy(), Party.ALICE), reconciled(run.bob, Party.BOB)
