"""State tables and decoding rules of the qubit protocols."""

from typing import Optional, Tuple

from ..models import Basis, Outcome
from ..photonics.signals import Bloch

H: Bloch = (1.0, 0.0, 0.0)
V: Bloch = (-1.0, 0.0, 0.0)
R: Bloch = (0.0, 1.0, 0.0)
L: Bloch = (0.0, -1.0, 0.0)

# SARG04 pairs (state for bit 0, state for bit 1); the pair is announced, never the state.
SARG04_PAIRS: Tuple[Tuple[Bloch, Bloch], ...] = ((H, R), (R, V), (V, L), (L, H))


def basis_of(state: Bloch) -> Basis:
    return Basis.X if abs(state[0]) > 0.5 else Basis.Y


def _negate(state: Bloch) -> Bloch:
    return (-state[0], -state[1], -state[2])


def measured_state(basis: Basis, outcome: Outcome) -> Optional[Bloch]:
    """Bloch pole a detection outcome projects onto."""
    if outcome is Outcome.BIT0:
        return H if basis is Basis.X else R
    if outcome is Outcome.BIT1:
        return V if basis is Basis.X else L
    return None


def sarg04_state(pair_id: int, bit: int) -> Bloch:
    return SARG04_PAIRS[pair_id][bit]


def sarg04_decode(pair_id: int, basis: Optional[Basis], outcome: Outcome) -> Optional[int]:
    """Bob's bit for an announced pair, or None when the result is inconclusive.

    Observing the state orthogonal to one member of the pair excludes that
    member, so the other one was sent.
    """
    if basis is None:
        return None
    observed = measured_state(basis, outcome)
    if observed is None:
        return None
    s0, s1 = SARG04_PAIRS[pair_id]
    if observed == _negate(s0):
        return 1
    if observed == _negate(s1):
        return 0
    return None
