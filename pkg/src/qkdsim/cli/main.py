"""``qkdsim`` command line: run scenario files and the acceptance suite."""

import argparse
import sys
from typing import Dict, List, Optional

import structlog
from pydantic import ValidationError

from config.logging_config import configure_logging

from ..config import get_settings
from ..errors import ConfigurationError, SessionAbort
from .runner import EXIT_ABORT, EXIT_CONFIG, AnyScenario, execute
from .scenario import VerifyScenario, format_validation_error, load_scenario

logger = structlog.get_logger(__name__)

SUBCOMMAND_KINDS: Dict[str, str] = {
    "run-session": "SESSION",
    "sweep": "SWEEP",
    "run-network": "NETWORK",
    "run-qnrc": "QNRC",
    "verify": "VERIFY",
}


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="Override the master seed")
    parser.add_argument("--out", default=None, help="Output root directory")
    parser.add_argument("--jobs", type=int, default=None, help="Worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qkdsim",
        description="Deterministic QKD link, attack, post-processing and network simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, kind in SUBCOMMAND_KINDS.items():
        p = sub.add_parser(command, help=f"Run a {kind} scenario")
        if command == "verify":
            p.add_argument("scenario", nargs="?", default=None,
                           help="Optional VERIFY scenario file")
            p.add_argument("--criteria", type=int, nargs="+", default=None,
                           help="Criterion numbers to run (default: all)")
        else:
            p.add_argument("scenario", help="Scenario JSON file")
        _common(p)
    return parser


def _load(args: argparse.Namespace) -> AnyScenario:
    expected = SUBCOMMAND_KINDS[args.command]
    if args.command == "verify" and args.scenario is None:
        seed = get_settings().default_seed if args.seed is None else args.seed
        return VerifyScenario(kind="VERIFY", seed=seed, criteria=args.criteria)
    scenario = load_scenario(args.scenario)
    if scenario.kind != expected:
        raise ConfigurationError(f"kind: {args.command} expects a {expected} scenario, "
                                 f"got {scenario.kind}")
    update: Dict[str, object] = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.command == "verify" and args.criteria is not None:
        update["criteria"] = args.criteria
    if update:
        scenario = type(scenario).model_validate({**scenario.model_dump(), **update})
    return scenario


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code.

    0 success, 1 failed acceptance check, 2 configuration error, 3 runtime
    abort.
    """
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(settings.log, settings.log_format)

    try:
        scenario = _load(args)
        if args.jobs is not None and args.jobs < 1:
            raise ConfigurationError(f"jobs: must be >= 1, got {args.jobs}")
        outcome = execute(scenario, out=args.out, jobs=args.jobs)
    except ValidationError as e:
        print(f"configuration error:\n{format_validation_error(e)}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigurationError as e:
        print(f"configuration error:\n{e.message}", file=sys.stderr)
        return EXIT_CONFIG
    except SessionAbort as e:
        logger.error("run_aborted", code=e.code, reason=e.message)
        print(f"aborted ({e.code}): {e.message}", file=sys.stderr)
        return EXIT_ABORT

    print(outcome.path)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
