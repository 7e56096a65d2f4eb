from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from gpps.run_config import Task, parse_config
from gpps.runner import RunStatus, code_version, run
from gpps.utils.internal import NumericalAlarm

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_ALARM = 3
EXIT_INTERNAL = 4

COMMANDS = [task.value.replace("_", "-") for task in Task]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpps",
        description="Ground states, dynamics and dimension reduction of dipolar "
        "Gross-Pitaevskii-Poisson models.",
    )
    parser.add_argument("--version", action="version", version=code_version())
    parser.add_argument("command", choices=COMMANDS, help="Task to run.")
    parser.add_argument(
        "--config", required=True, help="YAML run configuration file."
    )
    parser.add_argument("--out", default=None, help="Output directory override.")
    parser.add_argument("--seed", type=int, default=None, help="Seed override.")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Console entry point: `gpps <command> --config <file> [--out <dir>]
    [--seed <n>]`.

    Returns:
        int: 0 on success, 2 on a validation error, 3 on a numerical alarm
            (raised or recorded in the result), 4 on any other error.
    """
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, "r") as file:
            text = file.read()
        config = parse_config(
            text, task=args.command, output_directory=args.out, seed=args.seed
        )
    except (OSError, ValueError) as error:
        print(f"gpps: invalid configuration: {error}", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        manifest = run(config)
    except NumericalAlarm as alarm:
        print(f"gpps: {type(alarm).__name__}: {alarm}", file=sys.stderr)
        return EXIT_ALARM
    except ValueError as error:
        print(f"gpps: invalid input: {error}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as error:
        print(f"gpps: internal error: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_INTERNAL

    if manifest.status == RunStatus.ALARM:
        print(f"gpps: {manifest.error}", file=sys.stderr)
        return EXIT_ALARM
    print(f"gpps: {manifest.task} finished, outputs in {config.output.directory}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
