"""Scenario execution: one run directory per scenario, one exit code per run."""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import structlog

from ..config import get_settings
from ..monitoring.metrics import SimulationMetrics
from ..netsim.graph import TrustedNetwork
from ..netsim.orchestrator import TransportOrchestrator
from ..netsim.provisioning import provision_links
from ..orchestration.orchestrator import SessionOrchestrator, SessionResult
from ..postproc.keyfile import write_key_file
from ..qnrc.harness import run_qnrc
from ..randomness import derive_seed
from .acceptance import run_acceptance
from .output import RunDirectory
from .scenario import (
    NetworkScenario,
    QnrcScenario,
    SessionScenario,
    SweepScenario,
    VerifyScenario,
    load_scenario,
)
from .sweep import sweep_distance

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_ABORT = 3

AnyScenario = Union[SessionScenario, SweepScenario, NetworkScenario, QnrcScenario, VerifyScenario]


@dataclass
class RunOutcome:
    """Exit code and the directory holding the run's artifacts."""

    exit_code: int
    run_dir: RunDirectory

    @property
    def path(self) -> Path:
        return self.run_dir.path


def _key_metadata(result: SessionResult, trial: int, party: str) -> Dict[str, object]:
    key = result.key_a if party == "alice" else result.key_b
    return {
        "seed": result.seed,
        "trial": trial,
        "party": party,
        "protocol": result.protocol.value,
        "n_reconciled": key.n_reconciled,
        "leak_bits": key.leak_bits,
        "e1_upper": key.e1_upper,
        "single_photon_fraction": key.single_photon_fraction,
        "s": key.s,
        "l": key.l,
    }


def run_session(scenario: SessionScenario, run_dir: RunDirectory) -> int:
    """Run ``trials`` sessions; trial t is seeded with derive_seed(seed, t)."""
    metrics = SimulationMetrics()
    orchestrator = SessionOrchestrator(params=scenario.security, rate_mode=scenario.rate_mode,
                                       metrics=metrics, auth_bits=scenario.auth_bits)
    sync = scenario.sync
    if sync is None and scenario.fault is not None:
        sync = get_settings().get_sync_config()
    rows: List[Dict[str, object]] = []
    transitions: List[Dict[str, object]] = []
    aborted = 0
    for trial in range(scenario.trials):
        cfg = scenario.session.model_copy(update={"seed": derive_seed(scenario.seed, trial)})
        result = orchestrator.run(cfg, scenario.channel, scenario.detector,
                                  attack_cfg=scenario.attack, sync=sync,
                                  fault=scenario.fault)
        rows.append({"trial": trial, **result.flat_record()})
        if result.sync is not None:
            transitions.extend({"trial": trial, **t.flat_record()} for t in result.sync.transitions)
        aborted += result.aborted
        if scenario.write_keys and not result.aborted:
            for party, key in (("alice", result.key_a), ("bob", result.key_b)):
                write_key_file(run_dir.file(f"keys/trial{trial}_{party}.qkey"), key.bits,
                               _key_metadata(result, trial, party))

    run_dir.write_rows("results.csv", rows)
    if scenario.sync is not None or scenario.fault is not None:
        run_dir.write_rows("transitions.csv", transitions,
                           columns=["trial", "step", "from", "to", "classification", "offset",
                                    "qber"])
    run_dir.write_text("metrics.prom", metrics.render())
    run_dir.write_metadata({"trials": scenario.trials, "aborted": aborted})
    return EXIT_ABORT if aborted else EXIT_OK


def run_sweep(scenario: SweepScenario, run_dir: RunDirectory, jobs: int) -> int:
    rows, fits = sweep_distance(scenario, jobs=jobs)
    run_dir.write_rows("results.csv", rows)
    run_dir.write_json("fit.json", {"fits": fits})
    run_dir.write_text("metrics.prom", SimulationMetrics().render())
    run_dir.write_metadata({"points": len(rows)})
    return EXIT_OK


def run_network(scenario: NetworkScenario, run_dir: RunDirectory, jobs: int) -> int:
    """Provision every link, then serve the transport requests in order."""
    metrics = SimulationMetrics()
    network = TrustedNetwork(scenario.network, seed=scenario.seed)
    provisions = provision_links(network, scenario.provisioning, scenario.duration,
                                 seed=scenario.seed, params=scenario.security,
                                 metrics=metrics, jobs=jobs)
    # link i is seeded with derive_seed(seed, i); transport takes the next index
    orchestrator = TransportOrchestrator(network, seed=derive_seed(scenario.seed, len(provisions)),
                                         metrics=metrics)
    reports = orchestrator.process(scenario.requests)

    ledger = [
        {"store": store, "produced": produced, "consumed_otp": otp, "consumed_auth": auth,
         "available": available}
        for store, (produced, otp, auth, available) in network.ledger().items()
    ]
    run_dir.write_rows("results.csv", [p.flat_record() for p in provisions])
    run_dir.write_rows("deliveries.csv", [r.flat_record() for r in reports],
                       columns=["request_id", "src", "dst", "n_bytes", "path", "outcome",
                                "intact", "failed_hop", "consumption"])
    run_dir.write_rows("ledger.csv", ledger)
    run_dir.write_text("metrics.prom", metrics.render())
    run_dir.write_metadata({"flagged": dict(sorted(network.flagged.items()))})
    return EXIT_OK


def run_qnrc_scenario(scenario: QnrcScenario, run_dir: RunDirectory) -> int:
    report = run_qnrc(scenario.y00, scenario.n_symbols, scenario.seed, seed_key=scenario.seed_key)
    record = {**scenario.y00.model_dump(mode="json"), **report.flat_record()}
    record["tap_exponents"] = "-".join(str(e) for e in scenario.y00.tap_exponents)
    run_dir.write_rows("results.csv", [record])
    run_dir.write_text("metrics.prom", SimulationMetrics().render())
    run_dir.write_metadata()
    return EXIT_OK


def run_verify(scenario: VerifyScenario, run_dir: RunDirectory) -> int:
    results = run_acceptance(scenario.seed, scenario.criteria)
    run_dir.write_rows("results.csv", [r.flat_record() for r in results],
                       columns=["criterion", "name", "passed", "measured"])
    run_dir.write_text("metrics.prom", SimulationMetrics().render())
    run_dir.write_metadata({"passed": sum(r.passed for r in results), "total": len(results)})
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED_CHECK


def execute(scenario: AnyScenario, out: Optional[Union[str, Path]] = None,
            jobs: Optional[int] = None) -> RunOutcome:
    """Run a validated scenario and write its artifacts.

    Args:
        scenario: Validated scenario model
        out: Output root; scenario ``out`` then ``QKDSIM_OUT_DIR`` when omitted
        jobs: Worker processes for sweeps and FULL_SIM provisioning

    Returns:
        RunOutcome with the exit code: 0 success, 1 failed acceptance
        check, 3 a session aborted
    """
    settings = get_settings()
    root = Path(out or scenario.out or settings.out_dir)
    jobs = jobs or settings.jobs
    run_dir = RunDirectory(root, scenario).prepare()
    log = logger.bind(kind=scenario.kind, seed=scenario.seed, run=run_dir.config_hash[:16])
    log.info("scenario_started")

    if isinstance(scenario, SessionScenario):
        code = run_session(scenario, run_dir)
    elif isinstance(scenario, SweepScenario):
        code = run_sweep(scenario, run_dir, jobs)
    elif isinstance(scenario, NetworkScenario):
        code = run_network(scenario, run_dir, jobs)
    elif isinstance(scenario, QnrcScenario):
        code = run_qnrc_scenario(scenario, run_dir)
    else:
        code = run_verify(scenario, run_dir)

    run_dir.finish()
    log.info("scenario_finished", exit_code=code)
    return RunOutcome(code, run_dir)


def run_scenario(path: Union[str, Path], seed: Optional[int] = None,
                 out: Optional[Union[str, Path]] = None,
                 jobs: Optional[int] = None) -> RunOutcome:
    """Load, validate and run a scenario file.

    ``seed`` overrides the file's master seed.

    Raises:
        ConfigurationError: Unreadable or invalid scenario
    """
    scenario = load_scenario(path)
    if seed is not None:
        scenario = type(scenario).model_validate({**scenario.model_dump(), "seed": seed})
    return execute(scenario, out=out, jobs=jobs)
