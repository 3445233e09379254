"""Running-key expansion with a Fibonacci LFSR."""

import math
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
import structlog
from sympy import Poly, factorint, symbols
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_pow_mod

from ..errors import DegenerateStateError, KeystreamExhausted

logger = structlog.get_logger(__name__)


@lru_cache(maxsize=32)
def is_primitive(exponents: Tuple[int, ...]) -> bool:
    """Whether sum(x^e) is a primitive polynomial over GF(2)."""
    x = symbols("x")
    degree = max(exponents)
    poly = Poly(sum(x ** e for e in exponents), x, modulus=2)
    if not poly.is_irreducible:
        return False
    coeffs = [int(c) % 2 for c in poly.all_coeffs()]
    order = 2 ** degree - 1
    for prime in factorint(order):
        if gf_pow_mod([1, 0], order // prime, coeffs, 2, ZZ) == [1]:
            return False
    return True


class RunningKeyGen:
    """Fibonacci LFSR ``s[k + n] = XOR_e s[k + e]`` over the non-leading tap exponents.

    Symbols take ``ceil(log2 M)`` successive output bits, most significant
    first; values >= M are rejected and redrawn.
    """

    def __init__(self, seed_key: int, tap_exponents: Sequence[int], M: int):
        exps = sorted(set(int(e) for e in tap_exponents), reverse=True)
        self.degree = exps[0]
        self.feedback = [e for e in exps if e < self.degree]
        self.M = M
        self.bits_per_symbol = max(1, math.ceil(math.log2(M)))
        self.period = 2 ** self.degree - 1
        self.bits_drawn = 0
        self.primitive = is_primitive(tuple(exps))
        if not self.primitive:
            logger.warning("lfsr_not_primitive", taps=exps)
        state = seed_key & ((1 << self.degree) - 1)
        if state == 0:
            raise DegenerateStateError("LFSR seed key reduces to the all-zero state")
        self._window = np.array([(state >> i) & 1 for i in range(self.degree)], dtype=np.uint8)
        self._block = self.degree - max(self.feedback)

    @property
    def state(self) -> int:
        """Current register contents, bit i holding the i-th next output."""
        return int(sum(int(b) << i for i, b in enumerate(self._window)))

    def next_bits(self, count: int) -> np.ndarray:
        """The next ``count`` output bits.

        Raises:
            KeystreamExhausted: Drawing past the register period
        """
        if self.bits_drawn + count > self.period:
            raise KeystreamExhausted(
                f"{self.bits_drawn + count} bits exceed the LFSR period {self.period}",
                details={"period": self.period, "requested": count},
            )
        out = np.empty(count, dtype=np.uint8)
        window = self._window
        produced = 0
        while produced < count:
            step = min(self._block, count - produced)
            fresh = np.zeros(step, dtype=np.uint8)
            for e in self.feedback:
                fresh ^= window[e:e + step]
            out[produced:produced + step] = window[:step]
            window = np.concatenate([window[step:], fresh])
            produced += step
        self._window = window
        self.bits_drawn += count
        return out


def expand_running_key(gen: RunningKeyGen, n: int) -> np.ndarray:
    """Running-key symbols Z_1..Z_n in [0, M).

    Raises:
        ValueError: n < 1
        KeystreamExhausted: The register period would be exceeded
    """
    if n < 1:
        raise ValueError("need at least one running-key symbol")
    b = gen.bits_per_symbol
    weights = 1 << np.arange(b - 1, -1, -1, dtype=np.int64)
    out = np.empty(0, dtype=np.int64)
    while len(out) < n:
        missing = n - len(out)
        # oversample a little when rejection sampling is active
        draw = missing if gen.M == 1 << b else int(missing * (1 << b) / gen.M) + 8
        values = gen.next_bits(draw * b).reshape(draw, b).astype(np.int64) @ weights
        out = np.concatenate([out, values[values < gen.M]])
    return out[:n]
