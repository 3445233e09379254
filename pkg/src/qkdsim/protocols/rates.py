"""Secure key-rate bounds and the closed-form session model used by sweeps."""

import math
from typing import Optional, Tuple

import numpy as np
import structlog
from scipy.optimize import minimize_scalar

from ..attacks.pns import PNSAttack
from ..bounds import binary_entropy, multi_photon_probability
from ..errors import ConfigurationError, MissingBoundsError
from ..models import (
    ChannelModel,
    ClassStats,
    DecoyBounds,
    DetectorModel,
    KeyRateEstimate,
    PhotonStatistics,
    Protocol,
    RateMode,
    SecurityParams,
    SessionConfig,
    SessionStats,
)
from .decoy import decoy_bound, decoy_intensities

logger = structlog.get_logger(__name__)

VACUUM_ERROR_RATE = 0.5


def sifting_factor(protocol: Protocol, basis_bias: float = 0.5) -> float:
    """Fraction of detected signals that survives sifting.

    BB84 keeps matching bases (p^2 + (1-p)^2); SARG04 keeps conclusive
    outcomes, a quarter of the detections whatever the bias. B92 and DPS
    sift on the measured conclusive fraction, so the factor is 1 here.
    """
    if protocol in (Protocol.BB84, Protocol.BB84_DECOY):
        return basis_bias ** 2 + (1.0 - basis_bias) ** 2
    if protocol is Protocol.SARG04:
        return 0.25
    return 1.0


def finite_size_penalty(params: SecurityParams, n_pulses: int) -> float:
    """Per-pulse cost of the 2l + s bit finite-size margin."""
    return (2 * params.l + params.s) / n_pulses


def key_rate(stats: SessionStats, bounds: Optional[DecoyBounds], mode: RateMode,
             leak_ec: float, params: SecurityParams, finite_size: bool = True) -> KeyRateEstimate:
    """Secure key rate per emitted pulse.

    ``R = q [Q1 (1 - h2(e1)) - f Q h2(E)] - (2l + s) / N`` clamped at zero.

    Args:
        stats: Session statistics of the signal class
        bounds: Decoy bounds, required in DECOY mode
        mode: How the single-photon contribution is bounded
        leak_ec: Error-correction inefficiency f (leakage / n h2(E))
        params: Security parameters
        finite_size: Subtract the finite-size margin

    Raises:
        MissingBoundsError: DECOY mode without bounds
    """
    penalty = finite_size_penalty(params, stats.n_pulses) if finite_size else 0.0
    q_mu = stats.gain()
    e_mu = stats.error_rate()

    if stats.protocol in (Protocol.B92, Protocol.DPS):
        conclusive = stats.sifted_length / stats.n_pulses
        rate = conclusive * (1.0 - binary_entropy(e_mu) - leak_ec * binary_entropy(e_mu))
        return KeyRateEstimate(rate=max(0.0, rate - penalty), mode=mode, composable=False,
                               sifting_factor=1.0, q1=conclusive, e1=e_mu,
                               finite_size_penalty=penalty)

    q = sifting_factor(stats.protocol, stats.basis_bias)
    mu = stats.classes[stats.signal_class].mu
    if mode is RateMode.SINGLE_PHOTON:
        q1, e1 = q_mu, e_mu
    elif mode is RateMode.WCP_WORSTCASE:
        q1 = max(0.0, q_mu - multi_photon_probability(mu))
        e1 = min(0.5, e_mu * q_mu / q1) if q1 > 0.0 else 0.5
    else:
        if bounds is None:
            raise MissingBoundsError("DECOY rate mode needs decoy bounds")
        q1 = bounds.q1_lower
        e1 = bounds.e1_upper

    rate = q * (q1 * (1.0 - binary_entropy(e1)) - leak_ec * q_mu * binary_entropy(e_mu))
    return KeyRateEstimate(rate=max(0.0, rate - penalty), mode=mode, sifting_factor=q,
                           q1=q1, e1=e1, finite_size_penalty=penalty)


def estimate_rate(stats: SessionStats, mode: RateMode, params: SecurityParams,
                  leak_ec: Optional[float] = None,
                  finite_size: bool = True) -> Tuple[KeyRateEstimate, Optional[DecoyBounds]]:
    """key_rate with the decoy bounds computed from ``stats`` when DECOY mode needs them."""
    bounds = None
    if mode is RateMode.DECOY:
        mu_signal, mu_decoy = decoy_intensities(stats)
        bounds = decoy_bound(stats, mu_signal, mu_decoy)
    f = params.ec_efficiency if leak_ec is None else leak_ec
    return key_rate(stats, bounds, mode, f, params, finite_size=finite_size), bounds


def _detection_probability(mu: float, eta: float, eff: float, statistics: PhotonStatistics,
                           attack: Optional[PNSAttack]) -> float:
    if mu == 0.0:
        return 0.0
    if attack is not None:
        return eff * attack.expected_forward_probability(mu)
    if statistics is PhotonStatistics.SINGLE_PHOTON:
        return eta * eff
    return 1.0 - math.exp(-eta * eff * mu)


def expected_stats(cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
                   attack: Optional[PNSAttack] = None) -> SessionStats:
    """Closed-form expected statistics of a BB84-family session.

    Dark counts contribute a yield Y0 = 1 - (1 - d)^2 at error 1/2 and the
    misalignment an optical error sin^2(theta/2) on signal detections.

    Raises:
        ConfigurationError: Protocol outside the BB84 family
    """
    if cfg.protocol not in (Protocol.BB84, Protocol.BB84_DECOY):
        raise ConfigurationError(
            f"closed-form statistics cover BB84 and BB84_DECOY, not {cfg.protocol.value}"
        )
    y0 = 1.0 - (1.0 - detector.dark) ** 2
    e_optical = math.sin(channel.misalignment_angle / 2.0) ** 2
    eff = detector.mean_efficiency
    q = sifting_factor(cfg.protocol, cfg.basis_bias)

    classes = {}
    for class_id in sorted(cfg.class_probabilities):
        p_class = cfg.class_probabilities[class_id]
        if p_class <= 0.0:
            continue
        mu = cfg.source.mu(class_id)
        p_det = _detection_probability(mu, channel.transmittance, eff,
                                       cfg.source.photon_statistics, attack)
        gain = 1.0 - (1.0 - y0) * (1.0 - p_det)
        error_rate = (VACUUM_ERROR_RATE * y0 + e_optical * p_det) / gain if gain > 0 else 0.5
        sent = max(1, round(cfg.n_pulses * p_class))
        clicks = round(sent * gain)
        sifted = round(clicks * q)
        classes[class_id] = ClassStats(
            class_id=class_id, mu=mu, sent=sent, clicks=clicks, gain=gain,
            sifted=sifted, tested=sifted, errors=round(sifted * error_rate),
            error_rate=min(1.0, error_rate),
        )
    signal = max(sorted(classes), key=lambda c: classes[c].mu)
    return SessionStats(
        protocol=cfg.protocol,
        n_pulses=max(cfg.n_pulses, sum(c.sent for c in classes.values())),
        basis_bias=cfg.basis_bias,
        classes=classes,
        sifted_length=sum(c.sifted for c in classes.values()),
        signal_class=signal,
    )


def with_signal_mu(cfg: SessionConfig, mu: float) -> SessionConfig:
    """Copy of ``cfg`` whose signal class emits intensity ``mu``."""
    signal = cfg.source.signal_class
    source = cfg.source.model_copy(update={"mu_by_class": {**cfg.source.mu_by_class, signal: mu}})
    return cfg.model_copy(update={"source": source})


def optimal_mu(cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
               params: SecurityParams, mode: RateMode = RateMode.WCP_WORSTCASE,
               leak_ec: Optional[float] = None,
               log10_bounds: Tuple[float, float] = (-6.0, 0.0)) -> Tuple[float, KeyRateEstimate]:
    """Signal intensity maximising the asymptotic rate.

    A logarithmic grid locates the peak, then a bounded scalar search refines
    it inside the neighbouring grid cells.
    """
    f = params.ec_efficiency if leak_ec is None else leak_ec

    def rate_at(log10_mu: float) -> KeyRateEstimate:
        stats = expected_stats(with_signal_mu(cfg, 10.0 ** log10_mu), channel, detector)
        estimate, _ = estimate_rate(stats, mode, params, leak_ec=f, finite_size=False)
        return estimate

    grid = np.linspace(log10_bounds[0], log10_bounds[1], 61)
    values = [rate_at(float(x)).rate for x in grid]
    best = int(np.argmax(values))
    if values[best] <= 0.0:
        return 10.0 ** float(grid[best]), rate_at(float(grid[best]))
    lo = float(grid[max(0, best - 1)])
    hi = float(grid[min(len(grid) - 1, best + 1)])
    result = minimize_scalar(lambda x: -rate_at(x).rate, bounds=(lo, hi), method="bounded")
    x_best = float(result.x) if -result.fun >= values[best] else float(grid[best])
    logger.debug("optimal_mu", mode=mode.value, mu=10.0 ** x_best, loss_db=channel.loss_db)
    return 10.0 ** x_best, rate_at(x_best)
