"""Vacuum + weak-decoy bounds on the single-photon yield and error rate."""

import math
from typing import Tuple

from ..errors import BoundUnavailableError, DegenerateBoundError
from ..models import DecoyBounds, SessionStats

VACUUM_ERROR_RATE = 0.5


def decoy_intensities(stats: SessionStats) -> Tuple[float, float]:
    """(signal, weakest non-vacuum decoy) intensities present in ``stats``.

    Raises:
        DegenerateBoundError: Fewer than two distinct non-zero intensities
    """
    positive = sorted({cs.mu for cs in stats.classes.values() if cs.mu > 0.0})
    if len(positive) < 2:
        raise DegenerateBoundError(
            "decoy bound needs two distinct non-zero intensities",
            details={"intensities": positive},
        )
    return positive[-1], positive[0]


def decoy_bound(stats: SessionStats, mu_signal: float, mu_decoy: float) -> DecoyBounds:
    """Lower-bound Y1 and upper-bound e1 from vacuum, weak-decoy and signal statistics.

    Raises:
        DegenerateBoundError: Identical or non-positive decoy intensity
        BoundUnavailableError: A required class is missing or untested
    """
    mu, nu = mu_signal, mu_decoy
    if nu <= 0.0 or math.isclose(mu, nu) or nu >= mu:
        raise DegenerateBoundError(
            f"need 0 < mu_decoy < mu_signal (got {nu} and {mu})",
            details={"mu_signal": mu, "mu_decoy": nu},
        )
    vac = stats.class_for_mu(0.0)
    sig = stats.class_for_mu(mu)
    dec = stats.class_for_mu(nu)
    if vac is None or sig is None or dec is None:
        raise BoundUnavailableError(
            "decoy bound needs vacuum, weak-decoy and signal classes",
            details={"vacuum": vac, "signal": sig, "decoy": dec},
        )
    decoy_stats = stats.classes[dec]
    if decoy_stats.error_rate is None:
        raise BoundUnavailableError("weak-decoy class has no tested bits")

    y0 = stats.gain(vac)
    q_mu = stats.gain(sig)
    q_nu = decoy_stats.gain
    e_nu = decoy_stats.error_rate

    y1 = (mu / (mu * nu - nu * nu)) * (
        q_nu * math.exp(nu)
        - q_mu * math.exp(mu) * nu * nu / (mu * mu)
        - (mu * mu - nu * nu) / (mu * mu) * y0
    )
    y1 = min(1.0, max(0.0, y1))
    if y1 > 0.0:
        e1 = (e_nu * q_nu * math.exp(nu) - VACUUM_ERROR_RATE * y0) / (y1 * nu)
        e1 = min(0.5, max(0.0, e1))
    else:
        e1 = 0.5
    return DecoyBounds(y1_lower=y1, e1_upper=e1, mu_signal=mu, mu_decoy=nu)
