"""Rate-versus-loss sweeps and their log-log scaling fit."""

from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Sequence, Tuple

import numpy as np
import structlog
from scipy.stats import linregress

from ..errors import ConfigurationError, QKDSimError
from ..models import (
    ChannelModel,
    DetectorModel,
    PhotonStatistics,
    Protocol,
    RateMode,
    SecurityParams,
    SessionConfig,
)
from ..orchestration.orchestrator import SessionOrchestrator
from ..protocols.rates import estimate_rate, expected_stats, optimal_mu, with_signal_mu
from ..randomness import derive_seed
from .scenario import SweepScenario

logger = structlog.get_logger(__name__)

Row = Dict[str, object]


def session_for_mode(cfg: SessionConfig, mode: RateMode) -> SessionConfig:
    """The session a rate mode is evaluated on.

    DECOY keeps every intensity class. The other modes run the signal class
    alone, SINGLE_PHOTON on an ideal single-photon source.
    """
    if mode is RateMode.DECOY:
        return cfg
    signal = cfg.source.signal_class
    statistics = (PhotonStatistics.SINGLE_PHOTON if mode is RateMode.SINGLE_PHOTON
                  else cfg.source.photon_statistics)
    source = cfg.source.model_copy(update={"mu_by_class": {signal: cfg.source.mu(signal)},
                                           "decoy_mode": False,
                                           "photon_statistics": statistics})
    protocol = Protocol.BB84 if cfg.protocol is Protocol.BB84_DECOY else cfg.protocol
    return cfg.model_copy(update={"protocol": protocol, "source": source,
                                  "class_probabilities": {signal: 1.0}})


def _analytic_point(cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
                    params: SecurityParams, mode: RateMode, optimize_mu: bool) -> Row:
    if mode is RateMode.WCP_WORSTCASE and optimize_mu:
        mu, _ = optimal_mu(cfg, channel, detector, params, mode=mode)
        cfg = with_signal_mu(cfg, mu)
    stats = expected_stats(cfg, channel, detector)
    estimate, _ = estimate_rate(stats, mode, params, finite_size=False)
    signal = stats.classes[stats.signal_class]
    return {"mu": signal.mu, "q_mu": signal.gain, "e_mu": signal.error_rate,
            "rate": estimate.rate, "q1": estimate.q1, "e1": estimate.e1}


def _simulated_point(cfg: SessionConfig, channel: ChannelModel, detector: DetectorModel,
                     params: SecurityParams, mode: RateMode, optimize_mu: bool) -> Row:
    if mode is RateMode.WCP_WORSTCASE and optimize_mu:
        mu, _ = optimal_mu(cfg, channel, detector, params, mode=mode)
        cfg = with_signal_mu(cfg, mu)
    result = SessionOrchestrator(params=params, rate_mode=mode).run(cfg, channel, detector)
    row: Row = {"mu": cfg.source.mu(cfg.source.signal_class)}
    if result.stats is not None:
        signal = result.stats.classes[result.stats.signal_class]
        row.update({"q_mu": signal.gain, "e_mu": signal.error_rate})
    row.update({"rate": 0.0 if result.rate is None else result.rate.rate,
                "secret_length": result.secret_length})
    if result.aborted:
        row["error"] = result.outcome
    return row


def sweep_point(scenario: SweepScenario, index: int, loss_db: float, mode: RateMode) -> Row:
    """Evaluate one (loss, mode) point; failures mark the row instead of raising."""
    seed = derive_seed(scenario.seed, index)
    cfg = session_for_mode(scenario.session, mode).model_copy(update={"seed": seed})
    channel = ChannelModel(loss_db=loss_db, misalignment_angle=scenario.misalignment_angle)
    row: Row = {"index": index, "loss_db": loss_db, "eta": channel.transmittance,
                "mode": mode.value, "seed": seed}
    evaluate = _simulated_point if scenario.simulate else _analytic_point
    try:
        row.update(evaluate(cfg, channel, scenario.detector, scenario.security, mode,
                            scenario.optimize_mu))
    except QKDSimError as e:
        row.update({"rate": 0.0, "error": e.code})
    row["aborted"] = "error" in row or not row.get("rate")
    return row


def _sweep_point_job(job: Tuple[SweepScenario, int, float, RateMode]) -> Row:
    return sweep_point(*job)


def fit_scaling(rows: Sequence[Row], mode: RateMode) -> Dict[str, object]:
    """Least-squares slope of log10(rate) against log10(eta) for one mode.

    A slope of x means R ~ eta^x. Points with zero rate are left out.
    """
    points = [(float(r["eta"]), float(r["rate"])) for r in rows
              if r["mode"] == mode.value and r.get("rate") and float(r["rate"]) > 0.0]
    fit: Dict[str, object] = {"mode": mode.value, "points": len(points)}
    if len(points) < 2:
        fit.update({"slope": None, "stderr": None, "intercept": None})
        return fit
    x = np.log10([eta for eta, _ in points])
    y = np.log10([rate for _, rate in points])
    result = linregress(x, y)
    stderr = float(result.stderr) if len(points) > 2 else 0.0
    fit.update({"slope": float(result.slope), "stderr": stderr,
                "intercept": float(result.intercept)})
    return fit


def sweep_distance(scenario: SweepScenario,
                   jobs: int = 1) -> Tuple[List[Row], List[Dict[str, object]]]:
    """Rate per loss point and mode, plus one scaling fit per mode.

    Points are independent, each seeded with derive_seed(seed, index), and
    run on a process pool when ``jobs > 1``. Rows come back in
    (mode, loss) order regardless of scheduling.

    Raises:
        ConfigurationError: Fewer than three loss points
    """
    if len(scenario.losses_db) < 3:
        raise ConfigurationError("a sweep needs at least three loss points")
    points = [(scenario, index, float(loss), mode)
              for index, (mode, loss) in enumerate(
                  (m, l) for m in scenario.modes for l in scenario.losses_db)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point_job, points))
    else:
        rows = [_sweep_point_job(point) for point in points]
    fits = [fit_scaling(rows, mode) for mode in scenario.modes]
    for fit in fits:
        logger.info("sweep_fit", **fit)
    return rows, fits

