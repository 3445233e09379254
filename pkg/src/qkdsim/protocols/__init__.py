"""Protocol drivers, sifting, statistics, decoy bounds and key rates."""

from .decoy import decoy_bound, decoy_intensities
from .encoders import SARG04_PAIRS, basis_of, sarg04_decode, sarg04_state
from .rates import (
    estimate_rate,
    expected_stats,
    finite_size_penalty,
    key_rate,
    optimal_mu,
    sifting_factor,
    with_signal_mu,
)
from .records import Announcements, RawLog, SiftedKey
from .session import run_quantum_phase
from .sifting import announce, sift
from .statistics import accumulate_stats

__all__ = [
    "Announcements",
    "RawLog",
    "SARG04_PAIRS",
    "SiftedKey",
    "accumulate_stats",
    "announce",
    "basis_of",
    "decoy_bound",
    "decoy_intensities",
    "estimate_rate",
    "expected_stats",
    "finite_size_penalty",
    "key_rate",
    "optimal_mu",
    "run_quantum_phase",
    "sarg04_decode",
    "sarg04_state",
    "sift",
    "sifting_factor",
    "with_signal_mu",
]
