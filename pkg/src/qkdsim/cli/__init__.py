"""Scenario runner, result writers, sweeps and the acceptance suite."""

from .acceptance import CRITERIA, CriterionResult, run_acceptance, sifting_oracle
from .output import RunDirectory, config_hash, package_versions, write_csv
from .runner import RunOutcome, execute, run_scenario
from .scenario import (
    NetworkScenario,
    QnrcScenario,
    SessionScenario,
    SweepScenario,
    VerifyScenario,
    load_scenario,
    parse_scenario,
)
from .sweep import fit_scaling, session_for_mode, sweep_distance

__all__ = [
    "CRITERIA",
    "CriterionResult",
    "NetworkScenario",
    "QnrcScenario",
    "RunDirectory",
    "RunOutcome",
    "SessionScenario",
    "SweepScenario",
    "VerifyScenario",
    "config_hash",
    "execute",
    "fit_scaling",
    "load_scenario",
    "package_versions",
    "parse_scenario",
    "run_acceptance",
    "run_scenario",
    "session_for_mode",
    "sifting_oracle",
    "sweep_distance",
    "write_csv",
]
