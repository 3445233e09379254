"""Statistical helpers shared by estimation, calibration and key-rate code."""

import math

import numpy as np
from scipy import stats


def binary_entropy(p: float) -> float:
    """h2(p) in bits; 0 at the endpoints."""
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))


def clopper_pearson_upper(errors: int, n: int, confidence: float) -> float:
    """One-sided exact binomial upper bound at the given confidence level."""
    if n <= 0:
        return 1.0
    if errors >= n:
        return 1.0
    return float(stats.beta.ppf(confidence, errors + 1, n - errors))


def hoeffding_deviation(n: int, failure_prob: float) -> float:
    """Two-sided Hoeffding deviation of an n-sample mean at the given failure probability."""
    if n <= 0:
        return 1.0
    return float(np.sqrt(np.log(2.0 / failure_prob) / (2.0 * n)))


def multi_photon_probability(mu: float) -> float:
    """P(n >= 2) for a Poisson source of mean mu."""
    return float(1.0 - math.exp(-mu) * (1.0 + mu))


def single_photon_probability(mu: float) -> float:
    """P(n = 1) for a Poisson source of mean mu."""
    return float(mu * math.exp(-mu))
