"""Toeplitz hashing over GF(2)."""

import numpy as np
from scipy.signal import fftconvolve


def toeplitz_hash(bits: np.ndarray, seed_bits: np.ndarray, out_len: int) -> np.ndarray:
    """Multiply ``bits`` by the out_len x n Toeplitz matrix defined by ``seed_bits`` over GF(2).

    ``T[i, j] = seed[i - j + n - 1]``, so the product is a slice of the full
    convolution of seed and input.

    Raises:
        ValueError: Seed shorter than n + out_len - 1
    """
    x = np.asarray(bits, dtype=np.uint8)
    n = len(x)
    if out_len <= 0 or n == 0:
        return np.zeros(max(out_len, 0), dtype=np.uint8)
    seed = np.asarray(seed_bits, dtype=np.uint8)
    if len(seed) < n + out_len - 1:
        raise ValueError(f"Toeplitz seed needs {n + out_len - 1} bits, got {len(seed)}")
    conv = fftconvolve(seed[: n + out_len - 1].astype(np.float64), x.astype(np.float64))
    window = np.rint(conv[n - 1: n - 1 + out_len]).astype(np.int64)
    return (window & 1).astype(np.uint8)


def toeplitz_seed(rng: np.random.Generator, n: int, out_len: int) -> np.ndarray:
    """Public random seed for an out_len x n Toeplitz matrix."""
    return rng.integers(0, 2, size=max(0, n + out_len - 1), dtype=np.uint8)
