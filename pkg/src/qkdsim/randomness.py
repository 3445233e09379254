"""Seeded randomness: independent per-role streams derived from one seed."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SessionStreams:
    """Independent generators for every role in a session.

    Splitting the seed per role keeps the honest streams untouched when an
    attack draws extra randomness.
    """

    alice: np.random.Generator
    channel: np.random.Generator
    bob: np.random.Generator
    eve: np.random.Generator
    post: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "SessionStreams":
        children = np.random.SeedSequence(seed).spawn(5)
        return cls(*(np.random.default_rng(child) for child in children))


def derive_seed(master: int, index: int) -> int:
    """Child seed for point ``index`` of a run seeded with ``master``."""
    state = np.random.SeedSequence([master, index]).generate_state(1, dtype=np.uint64)
    return int(state[0] >> np.uint64(1))


def random_bits(rng: np.random.Generator, n: int) -> np.ndarray:
    """n uniform bits as uint8."""
    return rng.integers(0, 2, size=n, dtype=np.uint8)
