"""Test-bit sampling and QBER estimation."""

from typing import Tuple

import numpy as np
import structlog

from ..bounds import clopper_pearson_upper
from ..errors import EmptyTestSetError
from ..models import QberEstimate, SecurityParams
from ..protocols.records import SiftedKey

logger = structlog.get_logger(__name__)

KeyPair = Tuple[SiftedKey, SiftedKey]


def split_test_bits(sifted: KeyPair, test_fraction: float,
                    rng: np.random.Generator) -> Tuple[KeyPair, KeyPair]:
    """Draw a uniformly random test subset without replacement.

    Args:
        sifted: Aligned (Alice, Bob) sifted keys
        test_fraction: Fraction of positions disclosed for testing, in (0, 1)
        rng: Public randomness shared by both parties

    Returns:
        ((test_alice, test_bob), (code_alice, code_bob)); the two subsets
        partition the sifted positions and keep slot order.

    Raises:
        EmptyTestSetError: Sifted key is empty
        ValueError: Fraction outside (0, 1)
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    key_a, key_b = sifted
    n = len(key_a)
    if n == 0:
        raise EmptyTestSetError("cannot draw test bits from an empty sifted key")
    n_test = min(n, max(1, int(round(test_fraction * n))))
    mask = np.zeros(n, dtype=bool)
    mask[rng.choice(n, size=n_test, replace=False)] = True
    test = (key_a.subset(mask), key_b.subset(mask))
    code = (key_a.subset(~mask), key_b.subset(~mask))
    return test, code


def estimate_qber(test: KeyPair, params: SecurityParams) -> QberEstimate:
    """Point estimate and Clopper-Pearson upper bound at confidence 1 - 2^-s.

    The estimate is flagged ``abort`` when the upper bound reaches
    ``params.abort_qber``.

    Raises:
        EmptyTestSetError: No test bits
    """
    test_a, test_b = test
    n_test = len(test_a)
    if n_test == 0:
        raise EmptyTestSetError("QBER estimation needs at least one test bit")
    errors = int(np.count_nonzero(test_a.bits != test_b.bits))
    point = errors / n_test
    ci_upper = clopper_pearson_upper(errors, n_test, 1.0 - 2.0 ** (-params.s))
    abort = ci_upper >= params.abort_qber
    if abort:
        logger.warning("qber_abort", point=point, ci_upper=ci_upper, n_test=n_test,
                       threshold=params.abort_qber)
    return QberEstimate(point=point, ci_upper=ci_upper, n_test=n_test, errors=errors, abort=abort)
