"""Filling link key stores from simulated sessions or a calibrated rate curve."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from ..bounds import binary_entropy, clopper_pearson_upper
from ..errors import BoundUnavailableError, MissingBoundsError, SessionAbort
from ..models import (
    ChannelModel,
    DetectorModel,
    LinkConfig,
    ProvisioningMode,
    RateMode,
    SecurityParams,
    SessionConfig,
)
from ..monitoring.metrics import SimulationMetrics
from ..orchestration.orchestrator import SessionOrchestrator, SessionResult
from ..postproc.amplification import secret_length
from ..postproc.cascade import verification_width
from ..protocols.rates import estimate_rate, expected_stats
from ..randomness import derive_seed, random_bits
from .graph import TrustedNetwork

logger = structlog.get_logger(__name__)

DEFAULT_LOSS_GRID = tuple(float(x) for x in np.arange(0.0, 50.01, 2.5))
MAX_ATTEMPTS = 3


def expected_secret_bits(cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
                         params: SecurityParams, mode: RateMode) -> int:
    """Secret length the distillation pipeline is expected to reach on a session.

    Follows the pipeline step by step on the closed-form statistics: test
    sample, QBER upper bound, error-correction leakage at ``ec_efficiency``
    plus the verification hash, then the privacy amplification length.
    Returns 0 where the session would abort or no bound is available.
    """
    stats = expected_stats(cfg, channel, detector)
    try:
        rate, _ = estimate_rate(stats, mode, params, finite_size=False)
    except (BoundUnavailableError, MissingBoundsError):
        return 0
    signal = stats.classes[stats.signal_class]
    if signal.sifted == 0:
        return 0
    n_test = min(signal.sifted, max(1, round(cfg.test_fraction * signal.sifted)))
    n_code = signal.sifted - n_test
    qber = signal.error_rate or 0.0
    ci_upper = clopper_pearson_upper(round(qber * n_test), n_test, 1.0 - 2.0 ** (-params.s))
    if ci_upper >= params.abort_qber:
        return 0
    if mode is RateMode.SINGLE_PHOTON:
        e1, fraction = ci_upper, 1.0
    else:
        e1 = rate.e1
        fraction = min(1.0, rate.q1 / signal.gain) if signal.gain > 0 else 0.0
    verify_bits = params.verify_hash_bits or verification_width(params.s)
    leak = math.ceil(params.ec_efficiency * n_code * binary_entropy(qber)) + verify_bits
    return secret_length(n_code, e1, leak, fraction, params.s, params.l)


@dataclass
class RateCurve:
    """Expected secret bits per pulse against link loss, interpolated in log space."""

    losses_db: np.ndarray
    bits_per_pulse: np.ndarray
    n_pulses: int

    @classmethod
    def calibrate(cls, cfg: SessionConfig, detector: DetectorModel, params: SecurityParams,
                  mode: RateMode, misalignment_angle: float = 0.0,
                  losses_db: Sequence[float] = DEFAULT_LOSS_GRID) -> "RateCurve":
        """Sample :func:`expected_secret_bits` over a loss grid at ``cfg.n_pulses``."""
        values = [
            expected_secret_bits(cfg, ChannelModel(loss_db=loss,
                                                   misalignment_angle=misalignment_angle),
                                 detector, params, mode) / cfg.n_pulses
            for loss in losses_db
        ]
        return cls(np.asarray(losses_db, dtype=np.float64), np.asarray(values), cfg.n_pulses)

    @property
    def cutoff_db(self) -> Optional[float]:
        """Largest sampled loss with a positive rate."""
        positive = self.losses_db[self.bits_per_pulse > 0]
        return float(positive.max()) if positive.size else None

    def bits_per_pulse_at(self, loss_db: float) -> float:
        cutoff = self.cutoff_db
        if cutoff is None or loss_db > cutoff:
            return 0.0
        positive = self.bits_per_pulse > 0
        log_rate = np.log10(self.bits_per_pulse[positive])
        return float(10.0 ** np.interp(loss_db, self.losses_db[positive], log_rate))

    def deposit_bits(self, loss_db: float, duration: int) -> int:
        return int(math.floor(self.bits_per_pulse_at(loss_db) * duration))


@dataclass
class LinkProvision:
    """What provisioning put into one link."""

    link_id: str
    mode: ProvisioningMode
    deposited: int = 0
    attempts: int = 0
    flagged: bool = False
    outcome: str = "OK"
    qber: Optional[float] = None

    def flat_record(self) -> Dict[str, object]:
        return {
            "link_id": self.link_id,
            "mode": self.mode.value,
            "deposited": self.deposited,
            "attempts": self.attempts,
            "flagged": self.flagged,
            "outcome": self.outcome,
            "qber": "" if self.qber is None else self.qber,
        }


def _simulate_link(link: LinkConfig, secret: np.ndarray, link_seed: int, duration: int,
                   params: SecurityParams,
                   metrics: Optional[SimulationMetrics]) -> Tuple[Optional[SessionResult], int, np.ndarray]:
    orchestrator = SessionOrchestrator(params, rate_mode=link.rate_mode, metrics=metrics)
    attempts = 0
    result: Optional[SessionResult] = None
    try:
        for attempt in Retrying(stop=stop_after_attempt(MAX_ATTEMPTS),
                                retry=retry_if_exception_type(SessionAbort), reraise=True):
            with attempt:
                attempts = attempt.retry_state.attempt_number
                cfg = link.session.model_copy(
                    update={"n_pulses": duration, "seed": derive_seed(link_seed, attempts)}
                )
                result = orchestrator.run(cfg, link.channel, link.detector, auth_secret=secret)
                if result.auth_pool is not None:
                    secret = result.auth_pool.remaining_bits()
                if result.aborted:
                    raise SessionAbort(f"link {link.link_id} session aborted: {result.outcome}",
                                       details={"code": result.outcome})
    except SessionAbort:
        pass
    return result, attempts, secret


def provision_links(network: TrustedNetwork, mode: ProvisioningMode, duration: int,
                    seed: int = 0, params: Optional[SecurityParams] = None,
                    metrics: Optional[SimulationMetrics] = None,
                    jobs: int = 1) -> List[LinkProvision]:
    """Deposit distilled key into every link store.

    FULL_SIM runs a complete session of ``duration`` pulses per link,
    authenticated from the link's bootstrap secret and retried with a fresh
    seed when it aborts. RATE_MODEL deposits ``rate(loss) * duration`` bits
    from a curve calibrated on the closed-form session model. Links ending
    with no key are flagged in ``network.flagged``.

    Args:
        network: Network whose stores are filled
        mode: FULL_SIM or RATE_MODEL
        duration: Pulses per link
        seed: Master seed; link i uses derive_seed(seed, i)
        params: Security parameters
        metrics: Run metrics
        jobs: Links simulated concurrently (FULL_SIM)
    """
    params = params or SecurityParams()
    links = list(network.links.values())
    seeds = [derive_seed(seed, index) for index in range(len(links))]
    provisions: List[LinkProvision] = []

    if mode is ProvisioningMode.FULL_SIM:
        def run(i: int) -> Tuple[Optional[SessionResult], int, np.ndarray]:
            link = links[i]
            return _simulate_link(link, network.bootstrap[link.link_id], seeds[i], duration,
                                  params, metrics)

        with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
            outcomes = list(pool.map(run, range(len(links))))
        for link, (result, attempts, secret) in zip(links, outcomes):
            network.bootstrap[link.link_id] = secret
            provision = LinkProvision(link.link_id, mode, attempts=attempts)
            if result is not None and result.report is not None:
                provision.qber = result.report.qber.point
            if result is None or result.aborted:
                provision.outcome = "ABORT" if result is None else result.outcome
            elif result.secret_length > 0:
                provision.deposited = network.deposit(link.link_id, result.key_a.bits,
                                                      result.key_b.bits, ref="FULL_SIM")
            provisions.append(provision)
    else:
        for link, link_seed in zip(links, seeds):
            cfg = link.session.model_copy(update={"n_pulses": duration})
            curve = RateCurve.calibrate(cfg, link.detector, params, link.rate_mode,
                                        link.misalignment_angle)
            n_bits = curve.deposit_bits(link.loss_db, duration)
            provision = LinkProvision(link.link_id, mode, attempts=1)
            if n_bits:
                rng = np.random.default_rng(derive_seed(link_seed, MAX_ATTEMPTS + 1))
                bits = random_bits(rng, n_bits)
                provision.deposited = network.deposit(link.link_id, bits, bits.copy(),
                                                      ref="RATE_MODEL")
            provisions.append(provision)

    for provision in provisions:
        if provision.deposited == 0:
            provision.flagged = True
            reason = "ZERO_RATE" if provision.outcome == "OK" else provision.outcome
            network.flagged[provision.link_id] = reason
            logger.warning("link_zero_rate", link=provision.link_id, outcome=provision.outcome,
                           attempts=provision.attempts)
    logger.info("links_provisioned", mode=mode.value, links=len(provisions),
                deposited=sum(p.deposited for p in provisions),
                flagged=sum(p.flagged for p in provisions))
    return provisions
